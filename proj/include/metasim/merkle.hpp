#pragma once

#include <cstdint>
#include <vector>

#include "metasim/result.hpp"
#include "metasim/tx.hpp"

namespace metasim::chain {

enum class Side : std::uint8_t { Left = 0, Right = 1 };

struct ProofStep {
    Hash32 sibling{};
    Side side = Side::Left;  // which side the sibling sits on

    bool operator==(const ProofStep&) const = default;
};

struct MerkleProof {
    Hash32 leaf{};
    std::vector<ProofStep> path;
    Hash32 root{};

    bool operator==(const MerkleProof&) const = default;
};

// Binary Merkle tree over transaction ids with domain separation: leaves are
// hashed with a 0x00 tag, internal nodes with 0x01, so an internal node can
// never be replayed as a leaf. Odd levels are padded with a zero leaf.
// An empty id list maps to the all-zero root.
Hash32 merkle_root(const std::vector<TxId>& ids);

enum class MerkleError { IndexOutOfRange };

Result<MerkleProof, MerkleError> merkle_prove(const std::vector<TxId>& ids,
                                              std::size_t index);

// Recomputes the root from leaf and path and compares with proof.root.
bool merkle_verify(const MerkleProof& proof);

// Leaf hash of a transaction id (what merkle_verify expects in proof.leaf).
Hash32 merkle_leaf(const TxId& id);

}  // namespace metasim::chain
