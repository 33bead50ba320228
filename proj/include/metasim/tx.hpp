#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "metasim/hash.hpp"

namespace metasim {

// The simulation runs exactly two currencies: the chain-native coin and the
// secondary token whose whole point is paying fees off the native rail.
enum class Currency : std::uint8_t { Native = 0, Meta = 1 };

enum class AddressKind : std::uint8_t {
    Normal = 0,
    AnyoneCanSpend = 1,   // spending key is public; whoever mines may sweep it
    ChannelContract = 2,  // escrow account controlled by channel rules only
};

struct Address {
    Hash32 id{};
    AddressKind kind = AddressKind::Normal;

    auto operator<=>(const Address&) const = default;
};

// Deterministic test/sim address from a small integer key.
Address derived_address(std::uint64_t key);

// The single well-known anyone-can-spend address of a simulation.
Address anyone_can_spend_address();

// Escrow address holding channel collateral.
Address channel_contract_address();

// Placeholder receiver meaning "whoever mines the including block"; resolved
// by the ledger at apply time. Modeled after VMs that expose the block miner.
Address current_miner_sentinel();
bool is_current_miner_sentinel(const Address& a);

struct TxId {
    Hash32 digest{};

    auto operator<=>(const TxId&) const = default;
};

enum class PayloadKind : std::uint8_t {
    TransferNative = 0,
    TransferMeta = 1,
    Noop = 2,
    ChannelOpen = 3,
    ChannelSettle = 4,
    ChannelRefund = 5,
    ClaimAnyoneCanSpend = 6,
};

// Account-model transaction. Signatures are modeled (a transaction is signed
// by its sender by construction); fees are split per currency and `delta`
// makes execution conditional on another transaction being mined first.
struct Transaction {
    Address sender;
    Address receiver;
    std::uint64_t amount = 0;     // currency chosen by payload
    std::uint64_t fee_native = 0;
    std::uint64_t fee_meta = 0;
    std::optional<TxId> delta;    // dependency: only valid after this id is mined
    std::uint64_t nonce = 0;
    PayloadKind payload = PayloadKind::Noop;
    std::vector<std::uint8_t> memo;  // channel parameters; empty otherwise

    bool operator==(const Transaction&) const = default;
};

// Canonical byte encoding: version tag, fixed field order, big-endian
// fixed-width integers, 0x00/0x01 option tags, length-prefixed memo.
// Documented in docs/serialization.md; golden vectors pin it in tests.
std::vector<std::uint8_t> serialize(const Transaction& tx);

// Inverse of serialize; nullopt on malformed or trailing bytes.
std::optional<Transaction> deserialize(const std::vector<std::uint8_t>& bytes);

TxId tx_id(const Transaction& tx);

// A transaction that pays its fee purely in the meta currency and is pinned
// to a predecessor. Such transactions are only minable in the same block as
// (and after) their delta target; see the block validation rules.
bool is_meta_fee_follower(const Transaction& tx);

}  // namespace metasim

template <>
struct std::hash<metasim::Address> {
    std::size_t operator()(const metasim::Address& a) const noexcept {
        std::size_t h = static_cast<std::size_t>(a.kind);
        for (int i = 0; i < 8; ++i) h = h * 31 + a.id[i];
        return h;
    }
};

template <>
struct std::hash<metasim::TxId> {
    std::size_t operator()(const metasim::TxId& t) const noexcept {
        std::size_t h = 0;
        for (int i = 0; i < 8; ++i) h = (h << 8) | t.digest[i];
        return h;
    }
};
