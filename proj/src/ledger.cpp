#include "metasim/ledger.hpp"

#include <cstring>

#include "metasim/merkle.hpp"

namespace metasim::chain {

namespace {

std::uint64_t map_get(const std::map<Address, std::uint64_t>& m, const Address& a) {
    auto it = m.find(a);
    return it == m.end() ? 0 : it->second;
}

void credit(std::map<Address, std::uint64_t>& m, const Address& a, std::uint64_t v) {
    if (v) m[a] += v;
}

// Caller must have verified the balance covers v.
void debit(std::map<Address, std::uint64_t>& m, const Address& a, std::uint64_t v) {
    if (v) m[a] -= v;
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

bool take_u64(const std::vector<std::uint8_t>& buf, std::size_t& pos, std::uint64_t& v) {
    if (pos + 8 > buf.size()) return false;
    v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | buf[pos++];
    return true;
}

}  // namespace

std::uint64_t Ledger::native_of(const Address& a) const { return map_get(balances_native, a); }
std::uint64_t Ledger::meta_of(const Address& a) const { return map_get(balances_meta, a); }

std::uint64_t Ledger::nonce_of(const Address& a) const {
    auto it = nonces.find(a);
    return it == nonces.end() ? 0 : it->second;
}

std::uint64_t Ledger::total_native() const {
    std::uint64_t s = 0;
    for (const auto& [_, v] : balances_native) s += v;
    return s;
}

std::uint64_t Ledger::total_meta() const {
    std::uint64_t s = 0;
    for (const auto& [_, v] : balances_meta) s += v;
    return s;
}

Hash32 block_hash(const Block& b) {
    std::vector<std::uint8_t> pre;
    pre.reserve(8 + 32 + 33 + 32 + 8);
    put_u64(pre, b.height);
    pre.insert(pre.end(), b.parent.begin(), b.parent.end());
    pre.insert(pre.end(), b.miner_id.id.begin(), b.miner_id.id.end());
    pre.push_back(static_cast<std::uint8_t>(b.miner_id.kind));
    pre.insert(pre.end(), b.merkle_root.begin(), b.merkle_root.end());
    put_u64(pre, b.gas_used);
    return sha256(pre);
}

std::vector<std::uint8_t> encode_open_memo(const ChannelOpenMemo& m) {
    std::vector<std::uint8_t> out;
    out.reserve(73);
    out.insert(out.end(), m.channel_id.begin(), m.channel_id.end());
    out.insert(out.end(), m.miner.id.begin(), m.miner.id.end());
    out.push_back(static_cast<std::uint8_t>(m.miner.kind));
    put_u64(out, m.timeout_at);
    return out;
}

std::optional<ChannelOpenMemo> decode_open_memo(const std::vector<std::uint8_t>& memo) {
    if (memo.size() != 73) return std::nullopt;
    ChannelOpenMemo m;
    std::memcpy(m.channel_id.data(), memo.data(), 32);
    std::memcpy(m.miner.id.data(), memo.data() + 32, 32);
    if (memo[64] > 2) return std::nullopt;
    m.miner.kind = static_cast<AddressKind>(memo[64]);
    std::size_t pos = 65;
    take_u64(memo, pos, m.timeout_at);
    return m;
}

std::vector<std::uint8_t> encode_channel_ref(const Hash32& channel_id) {
    return std::vector<std::uint8_t>(channel_id.begin(), channel_id.end());
}

std::optional<Hash32> decode_channel_ref(const std::vector<std::uint8_t>& memo) {
    if (memo.size() != 32) return std::nullopt;
    Hash32 id;
    std::memcpy(id.data(), memo.data(), 32);
    return id;
}

Result<Unit, BlockError> apply_tx(Ledger& st, const Transaction& tx,
                                  const Address& block_miner, std::uint64_t height,
                                  const std::set<TxId>& seen_in_block) {
    if (tx.nonce != st.nonce_of(tx.sender)) return BlockError::NonceGap;

    if (tx.delta) {
        // A meta-fee follower is only good in the same block as (and after)
        // its target: that pairing is what makes fee delegation atomic. A
        // plain dependency may also point at anything already mined.
        const bool in_block = seen_in_block.count(*tx.delta) != 0;
        if (is_meta_fee_follower(tx)) {
            if (!in_block) return BlockError::DependencyUnsatisfied;
        } else if (!in_block && !st.mined(*tx.delta)) {
            return BlockError::DependencyUnsatisfied;
        }
    }

    const Address recv =
        is_current_miner_sentinel(tx.receiver) ? block_miner : tx.receiver;

    // Native debits: transfer amount rides on top of the native fee.
    std::uint64_t native_out = tx.fee_native;
    std::uint64_t meta_out = tx.fee_meta;

    switch (tx.payload) {
        case PayloadKind::TransferNative:
            native_out += tx.amount;
            break;
        case PayloadKind::TransferMeta:
            meta_out += tx.amount;
            break;
        case PayloadKind::Noop:
            if (tx.amount != 0) return BlockError::MalformedTx;
            break;
        case PayloadKind::ChannelOpen: {
            auto memo = decode_open_memo(tx.memo);
            if (!memo) return BlockError::InvalidChannelOp;
            if (tx.receiver != channel_contract_address())
                return BlockError::InvalidChannelOp;
            if (tx.amount == 0) return BlockError::InvalidChannelOp;
            if (memo->channel_id != channel_id_for(tx.sender, memo->miner, tx.nonce))
                return BlockError::InvalidChannelOp;
            if (st.channels.count(memo->channel_id)) return BlockError::InvalidChannelOp;
            meta_out += tx.amount;
            break;
        }
        case PayloadKind::ChannelSettle: {
            auto ref = decode_channel_ref(tx.memo);
            if (!ref) return BlockError::InvalidChannelOp;
            auto it = st.channels.find(*ref);
            if (it == st.channels.end() || it->second.phase != ChannelPhase::Open)
                return BlockError::InvalidChannelOp;
            if (tx.sender != it->second.miner) return BlockError::InvalidChannelOp;
            if (tx.receiver != channel_contract_address())
                return BlockError::InvalidChannelOp;
            if (tx.amount > it->second.collateral) return BlockError::InvalidChannelOp;
            break;
        }
        case PayloadKind::ChannelRefund: {
            auto ref = decode_channel_ref(tx.memo);
            if (!ref) return BlockError::InvalidChannelOp;
            auto it = st.channels.find(*ref);
            if (it == st.channels.end() || it->second.phase != ChannelPhase::Open)
                return BlockError::InvalidChannelOp;
            if (tx.sender != it->second.sender) return BlockError::InvalidChannelOp;
            if (height <= it->second.timeout_at) return BlockError::InvalidChannelOp;
            if (tx.amount != it->second.collateral) return BlockError::InvalidChannelOp;
            break;
        }
        case PayloadKind::ClaimAnyoneCanSpend: {
            // Whole-balance sweep, spendable by anyone but only toward the
            // miner of the including block.
            if (tx.sender != anyone_can_spend_address()) return BlockError::InvalidClaim;
            if (recv != block_miner) return BlockError::InvalidClaim;
            if (tx.fee_native != 0 || tx.fee_meta != 0) return BlockError::InvalidClaim;
            if (tx.amount == 0 || tx.amount != st.meta_of(tx.sender))
                return BlockError::InvalidClaim;
            meta_out += tx.amount;
            break;
        }
    }

    if (st.native_of(tx.sender) < native_out) return BlockError::InsufficientBalance;
    if (st.meta_of(tx.sender) < meta_out) return BlockError::InsufficientBalance;

    // All checks passed; move funds.
    debit(st.balances_native, tx.sender, native_out);
    debit(st.balances_meta, tx.sender, meta_out);
    credit(st.balances_native, block_miner, tx.fee_native);
    credit(st.balances_meta, recv, tx.fee_meta);

    switch (tx.payload) {
        case PayloadKind::TransferNative:
            credit(st.balances_native, recv, tx.amount);
            break;
        case PayloadKind::TransferMeta:
        case PayloadKind::ClaimAnyoneCanSpend:
            credit(st.balances_meta, recv, tx.amount);
            break;
        case PayloadKind::ChannelOpen: {
            auto memo = decode_open_memo(tx.memo);
            credit(st.balances_meta, tx.receiver, tx.amount);
            Channel ch;
            ch.channel_id = memo->channel_id;
            ch.sender = tx.sender;
            ch.miner = memo->miner;
            ch.collateral = tx.amount;
            ch.sender_balance = tx.amount;
            ch.miner_balance = 0;
            ch.opened_at = height;
            ch.timeout_at = memo->timeout_at;
            ch.phase = ChannelPhase::Open;
            st.channels.emplace(ch.channel_id, ch);
            break;
        }
        case PayloadKind::ChannelSettle: {
            Channel& ch = st.channels.at(*decode_channel_ref(tx.memo));
            debit(st.balances_meta, channel_contract_address(), ch.collateral);
            credit(st.balances_meta, ch.miner, tx.amount);
            credit(st.balances_meta, ch.sender, ch.collateral - tx.amount);
            ch.miner_balance = tx.amount;
            ch.sender_balance = ch.collateral - tx.amount;
            ch.phase = ChannelPhase::ClosedByMiner;
            break;
        }
        case PayloadKind::ChannelRefund: {
            Channel& ch = st.channels.at(*decode_channel_ref(tx.memo));
            debit(st.balances_meta, channel_contract_address(), ch.collateral);
            credit(st.balances_meta, ch.sender, ch.collateral);
            ch.sender_balance = ch.collateral;
            ch.miner_balance = 0;
            ch.phase = ChannelPhase::RefundedAfterTimeout;
            break;
        }
        case PayloadKind::Noop:
            break;
    }

    st.nonces[tx.sender] = tx.nonce + 1;
    return Unit{};
}

Result<Ledger, BlockError> apply_block(const Ledger& ledger, const Block& block,
                                       const SimConfig& cfg) {
    if (block.height != ledger.height() + 1) return BlockError::BadHeight;
    const Hash32 expected_parent =
        ledger.chain.empty() ? zero_hash() : block_hash(ledger.chain.back());
    if (block.parent != expected_parent) return BlockError::BadParent;

    if (block.gas_used != block.txs.size() * cfg.base_tx_gas)
        return BlockError::BadGasUsed;
    if (block.gas_used > cfg.block_gas_limit) return BlockError::GasLimitExceeded;

    std::vector<TxId> ids;
    ids.reserve(block.txs.size());
    for (const auto& tx : block.txs) ids.push_back(tx_id(tx));
    if (merkle_root(ids) != block.merkle_root) return BlockError::BadMerkleRoot;

    Ledger next = ledger;
    credit(next.balances_native, block.miner_id, cfg.coinbase_native);

    std::set<TxId> seen;
    for (std::size_t i = 0; i < block.txs.size(); ++i) {
        auto res = apply_tx(next, block.txs[i], block.miner_id, block.height, seen);
        if (!res) return res.error();
        seen.insert(ids[i]);
    }

    for (const auto& id : ids)
        next.mined_index[id] = Ledger::MinedAt{block.height, block.miner_id};
    next.chain.push_back(block);
    return next;
}

Result<Address, ElectError> elect_miner(const std::vector<MinerProfile>& profiles,
                                        Rng& rng) {
    if (profiles.empty()) return ElectError::EmptyMinerSet;
    const double u = rng.uniform01();
    double cum = 0.0;
    for (const auto& p : profiles) {
        cum += p.hash_share;
        if (u < cum) return p.miner_id;
    }
    return profiles.back().miner_id;  // float residue lands on the last bucket
}

Result<Transaction, ClaimError> claim_anyone_can_spend(const Ledger& ledger,
                                                       const Address& miner) {
    const Address acs = anyone_can_spend_address();
    const std::uint64_t balance = ledger.meta_of(acs);
    if (balance == 0) return ClaimError::NothingToClaim;

    Transaction tx;
    tx.sender = acs;
    tx.receiver = miner;
    tx.amount = balance;
    tx.nonce = ledger.nonce_of(acs);
    tx.payload = PayloadKind::ClaimAnyoneCanSpend;
    return tx;
}

std::size_t count_unpaired_fee_followers(const std::vector<Block>& chain) {
    std::size_t violations = 0;
    for (const auto& block : chain) {
        std::set<TxId> seen;
        for (const auto& tx : block.txs) {
            if (is_meta_fee_follower(tx) && seen.count(*tx.delta) == 0) ++violations;
            seen.insert(tx_id(tx));
        }
    }
    return violations;
}

bool supplies_consistent(const Ledger& genesis, const Ledger& now,
                         const SimConfig& cfg) {
    const std::uint64_t blocks_added = now.chain.size() - genesis.chain.size();
    return now.total_meta() == genesis.total_meta() &&
           now.total_native() ==
               genesis.total_native() + blocks_added * cfg.coinbase_native;
}

}  // namespace metasim::chain
