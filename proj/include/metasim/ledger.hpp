#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "metasim/channel.hpp"
#include "metasim/result.hpp"
#include "metasim/rng.hpp"
#include "metasim/tx.hpp"

namespace metasim::chain {

struct MinerProfile {
    Address miner_id;
    double hash_share = 0.0;        // fraction of total hashrate, sums to 1
    bool accepts_meta_fees = true;  // policy: will take fee-follower batches
};

struct Block {
    std::uint64_t height = 0;
    Hash32 parent{};
    Address miner_id;
    std::vector<Transaction> txs;
    Hash32 merkle_root{};
    std::uint64_t gas_used = 0;

    bool operator==(const Block&) const = default;
};

Hash32 block_hash(const Block& b);

struct SimConfig {
    std::uint64_t block_gas_limit = 210000;
    std::uint64_t base_tx_gas = 21000;  // flat cost per transaction
    std::uint64_t seed = 0;
    std::uint64_t channel_timeout_blocks = 50;
    std::uint64_t coinbase_native = 100;  // minted to the miner per block
};

// Account state in both currencies plus the chain itself. Channels live here
// too because block application (open/settle/refund transactions) moves their
// escrow; the protocol logic that produces those transactions sits elsewhere.
struct Ledger {
    std::map<Address, std::uint64_t> balances_native;
    std::map<Address, std::uint64_t> balances_meta;
    std::map<Address, std::uint64_t> nonces;
    std::vector<Block> chain;
    std::map<Hash32, Channel> channels;

    struct MinedAt {
        std::uint64_t height = 0;
        Address miner;
    };
    std::map<TxId, MinedAt> mined_index;

    std::uint64_t height() const { return chain.empty() ? 0 : chain.back().height; }
    bool mined(const TxId& id) const { return mined_index.count(id) != 0; }
    std::uint64_t native_of(const Address& a) const;
    std::uint64_t meta_of(const Address& a) const;
    std::uint64_t nonce_of(const Address& a) const;

    std::uint64_t total_native() const;
    std::uint64_t total_meta() const;
};

// Memo payloads for channel transactions. The open memo fixes the channel id,
// the counterparty miner and the absolute timeout height; settle/refund memos
// name the channel.
struct ChannelOpenMemo {
    Hash32 channel_id{};
    Address miner;
    std::uint64_t timeout_at = 0;
};
std::vector<std::uint8_t> encode_open_memo(const ChannelOpenMemo& m);
std::optional<ChannelOpenMemo> decode_open_memo(const std::vector<std::uint8_t>& memo);
std::vector<std::uint8_t> encode_channel_ref(const Hash32& channel_id);
std::optional<Hash32> decode_channel_ref(const std::vector<std::uint8_t>& memo);

enum class BlockError {
    InsufficientBalance,
    NonceGap,
    DependencyUnsatisfied,
    InvalidClaim,
    InvalidChannelOp,
    MalformedTx,
    BadParent,
    BadHeight,
    BadMerkleRoot,
    GasLimitExceeded,
    BadGasUsed,
};

// Validates and applies a single transaction against `st` as if mined at
// `height` by `block_miner`. `seen_in_block` holds ids appearing earlier in
// the same block; fee followers must find their delta target there.
Result<Unit, BlockError> apply_tx(Ledger& st, const Transaction& tx,
                                  const Address& block_miner, std::uint64_t height,
                                  const std::set<TxId>& seen_in_block);

// Whole-block transition: validates the header and every transaction, then
// returns the successor state. Any failure rejects the block wholesale —
// `ledger` is never partially updated.
Result<Ledger, BlockError> apply_block(const Ledger& ledger, const Block& block,
                                       const SimConfig& cfg);

enum class ElectError { EmptyMinerSet };

// Samples a miner with probability equal to its hash share (CDF scan over the
// profile list in order, one uniform draw).
Result<Address, ElectError> elect_miner(const std::vector<MinerProfile>& profiles,
                                        Rng& rng);

enum class ClaimError { NothingToClaim };

// Sweep transaction for the anyone-can-spend balance. Valid only in a block
// whose miner is the named beneficiary, and only for the full balance at the
// time it executes.
Result<Transaction, ClaimError> claim_anyone_can_spend(const Ledger& ledger,
                                                       const Address& miner);

// Audit helpers used by the simulation loop and the test suites.

// Number of fee-follower transactions whose delta target does not appear
// earlier in the same block, summed over the whole chain. Zero on any chain
// produced by the block builder.
std::size_t count_unpaired_fee_followers(const std::vector<Block>& chain);

// True when every applied block conserved both currencies (meta fixed,
// native grows exactly by the per-block coinbase).
bool supplies_consistent(const Ledger& genesis, const Ledger& now,
                         const SimConfig& cfg);

}  // namespace metasim::chain
