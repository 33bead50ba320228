#include "metasim/tx.hpp"

#include <cstring>

namespace metasim {

namespace {

constexpr std::uint8_t kSerializationVersion = 0x01;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 3; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 7; i >= 0; --i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_hash(std::vector<std::uint8_t>& out, const Hash32& h) {
    out.insert(out.end(), h.begin(), h.end());
}

struct Reader {
    const std::vector<std::uint8_t>& buf;
    std::size_t pos = 0;

    bool take(std::uint8_t& v) {
        if (pos >= buf.size()) return false;
        v = buf[pos++];
        return true;
    }
    bool take_u32(std::uint32_t& v) {
        if (pos + 4 > buf.size()) return false;
        v = 0;
        for (int i = 0; i < 4; ++i) v = (v << 8) | buf[pos++];
        return true;
    }
    bool take_u64(std::uint64_t& v) {
        if (pos + 8 > buf.size()) return false;
        v = 0;
        for (int i = 0; i < 8; ++i) v = (v << 8) | buf[pos++];
        return true;
    }
    bool take_hash(Hash32& h) {
        if (pos + 32 > buf.size()) return false;
        std::memcpy(h.data(), buf.data() + pos, 32);
        pos += 32;
        return true;
    }
};

Address tagged_address(std::uint8_t fill, AddressKind kind) {
    Address a;
    a.id.fill(fill);
    a.kind = kind;
    return a;
}

}  // namespace

Address derived_address(std::uint64_t key) {
    std::vector<std::uint8_t> pre;
    const char* tag = "metasim/addr";
    pre.insert(pre.end(), tag, tag + std::strlen(tag));
    put_u64(pre, key);
    Address a;
    a.id = sha256(pre);
    a.kind = AddressKind::Normal;
    return a;
}

Address anyone_can_spend_address() {
    return tagged_address(0xAC, AddressKind::AnyoneCanSpend);
}

Address channel_contract_address() {
    return tagged_address(0xCC, AddressKind::ChannelContract);
}

Address current_miner_sentinel() {
    return tagged_address(0xFE, AddressKind::Normal);
}

bool is_current_miner_sentinel(const Address& a) {
    return a == current_miner_sentinel();
}

std::vector<std::uint8_t> serialize(const Transaction& tx) {
    std::vector<std::uint8_t> out;
    out.reserve(110 + tx.memo.size());
    out.push_back(kSerializationVersion);
    put_hash(out, tx.sender.id);
    out.push_back(static_cast<std::uint8_t>(tx.sender.kind));
    put_hash(out, tx.receiver.id);
    out.push_back(static_cast<std::uint8_t>(tx.receiver.kind));
    put_u64(out, tx.amount);
    put_u64(out, tx.fee_native);
    put_u64(out, tx.fee_meta);
    if (tx.delta) {
        out.push_back(0x01);
        put_hash(out, tx.delta->digest);
    } else {
        out.push_back(0x00);
    }
    put_u64(out, tx.nonce);
    out.push_back(static_cast<std::uint8_t>(tx.payload));
    put_u32(out, static_cast<std::uint32_t>(tx.memo.size()));
    out.insert(out.end(), tx.memo.begin(), tx.memo.end());
    return out;
}

std::optional<Transaction> deserialize(const std::vector<std::uint8_t>& bytes) {
    Reader r{bytes};
    std::uint8_t version = 0;
    if (!r.take(version) || version != kSerializationVersion) return std::nullopt;

    Transaction tx;
    std::uint8_t kind = 0;
    if (!r.take_hash(tx.sender.id) || !r.take(kind) || kind > 2) return std::nullopt;
    tx.sender.kind = static_cast<AddressKind>(kind);
    if (!r.take_hash(tx.receiver.id) || !r.take(kind) || kind > 2) return std::nullopt;
    tx.receiver.kind = static_cast<AddressKind>(kind);
    if (!r.take_u64(tx.amount) || !r.take_u64(tx.fee_native) || !r.take_u64(tx.fee_meta))
        return std::nullopt;
    std::uint8_t has_delta = 0;
    if (!r.take(has_delta) || has_delta > 1) return std::nullopt;
    if (has_delta) {
        TxId id;
        if (!r.take_hash(id.digest)) return std::nullopt;
        tx.delta = id;
    }
    if (!r.take_u64(tx.nonce)) return std::nullopt;
    std::uint8_t payload = 0;
    if (!r.take(payload) || payload > 6) return std::nullopt;
    tx.payload = static_cast<PayloadKind>(payload);
    std::uint32_t memo_len = 0;
    if (!r.take_u32(memo_len)) return std::nullopt;
    if (r.pos + memo_len != bytes.size()) return std::nullopt;  // no trailing bytes
    tx.memo.assign(bytes.begin() + static_cast<std::ptrdiff_t>(r.pos), bytes.end());
    return tx;
}

TxId tx_id(const Transaction& tx) {
    return TxId{sha256(serialize(tx))};
}

bool is_meta_fee_follower(const Transaction& tx) {
    return tx.fee_native == 0 && tx.fee_meta > 0 && tx.delta.has_value();
}

}  // namespace metasim
