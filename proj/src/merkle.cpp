#include "metasim/merkle.hpp"

namespace metasim::chain {

namespace {

constexpr std::uint8_t kLeafTag = 0x00;
constexpr std::uint8_t kNodeTag = 0x01;

Hash32 hash_node(const Hash32& left, const Hash32& right) {
    std::vector<std::uint8_t> pre;
    pre.reserve(65);
    pre.push_back(kNodeTag);
    pre.insert(pre.end(), left.begin(), left.end());
    pre.insert(pre.end(), right.begin(), right.end());
    return sha256(pre);
}

std::vector<Hash32> leaf_level(const std::vector<TxId>& ids) {
    std::vector<Hash32> level;
    level.reserve(ids.size());
    for (const auto& id : ids) level.push_back(merkle_leaf(id));
    return level;
}

}  // namespace

Hash32 merkle_leaf(const TxId& id) {
    std::vector<std::uint8_t> pre;
    pre.reserve(33);
    pre.push_back(kLeafTag);
    pre.insert(pre.end(), id.digest.begin(), id.digest.end());
    return sha256(pre);
}

Hash32 merkle_root(const std::vector<TxId>& ids) {
    if (ids.empty()) return zero_hash();
    std::vector<Hash32> level = leaf_level(ids);
    while (level.size() > 1) {
        if (level.size() % 2 != 0) level.push_back(zero_hash());
        std::vector<Hash32> next;
        next.reserve(level.size() / 2);
        for (std::size_t i = 0; i < level.size(); i += 2)
            next.push_back(hash_node(level[i], level[i + 1]));
        level = std::move(next);
    }
    return level[0];
}

Result<MerkleProof, MerkleError> merkle_prove(const std::vector<TxId>& ids,
                                              std::size_t index) {
    if (index >= ids.size()) return MerkleError::IndexOutOfRange;

    MerkleProof proof;
    proof.leaf = merkle_leaf(ids[index]);

    std::vector<Hash32> level = leaf_level(ids);
    std::size_t pos = index;
    while (level.size() > 1) {
        if (level.size() % 2 != 0) level.push_back(zero_hash());
        const std::size_t sibling = pos ^ 1;
        proof.path.push_back({level[sibling],
                              (pos % 2 == 0) ? Side::Right : Side::Left});
        std::vector<Hash32> next;
        next.reserve(level.size() / 2);
        for (std::size_t i = 0; i < level.size(); i += 2)
            next.push_back(hash_node(level[i], level[i + 1]));
        level = std::move(next);
        pos /= 2;
    }
    proof.root = level[0];
    return proof;
}

bool merkle_verify(const MerkleProof& proof) {
    Hash32 acc = proof.leaf;
    for (const auto& step : proof.path) {
        acc = (step.side == Side::Right) ? hash_node(acc, step.sibling)
                                         : hash_node(step.sibling, acc);
    }
    return acc == proof.root;
}

}  // namespace metasim::chain
