// Transaction model: hashing, addresses, canonical bytes, pair validation,
// and the seeded RNG everything downstream leans on.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "metasim/hash.hpp"
#include "metasim/metatx.hpp"
#include "metasim/rng.hpp"
#include "metasim/tx.hpp"

using namespace metasim;

namespace {

Transaction golden_tx() {
    Transaction tx;
    tx.sender = derived_address(1);
    tx.receiver = derived_address(2);
    tx.amount = 1000;
    tx.fee_native = 21;
    tx.fee_meta = 0;
    tx.nonce = 7;
    tx.payload = PayloadKind::TransferNative;
    return tx;
}

}  // namespace

TEST_CASE("sha256 agrees with the published vectors") {
    CHECK(to_hex(sha256(std::vector<std::uint8_t>{})) ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    std::vector<std::uint8_t> abc{'a', 'b', 'c'};
    CHECK(to_hex(sha256(abc)) ==
          "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("hex round-trips and rejects junk") {
    Hash32 h = sha256(std::vector<std::uint8_t>{1, 2, 3});
    Hash32 back{};
    REQUIRE(from_hex(to_hex(h), back));
    CHECK(back == h);
    Hash32 sink{};
    CHECK(!from_hex("abc", sink));                  // odd length / too short
    CHECK(!from_hex(std::string(64, 'g'), sink));   // not hex
    CHECK(!from_hex(std::string(66, 'a'), sink));   // wrong width
}

TEST_CASE("derived addresses are stable across builds") {
    CHECK(to_hex(derived_address(1).id) ==
          "f4f25b216a7e5cffbcede6e89901387014b9624888a8daf5f4522b05d2892a15");
    CHECK(to_hex(derived_address(2).id) ==
          "657b252c47428321e4cfae638b14c458e9e90d1c67e670762797d01189ef4d1e");
    CHECK(derived_address(1).kind == AddressKind::Normal);
    CHECK(derived_address(1) != derived_address(2));
}

TEST_CASE("well-known addresses") {
    const Address acs = anyone_can_spend_address();
    CHECK(acs.kind == AddressKind::AnyoneCanSpend);
    for (auto b : acs.id) CHECK(b == 0xAC);

    const Address sentinel = current_miner_sentinel();
    CHECK(sentinel.kind == AddressKind::Normal);
    for (auto b : sentinel.id) CHECK(b == 0xFE);
    CHECK(is_current_miner_sentinel(sentinel));
    CHECK(!is_current_miner_sentinel(acs));

    CHECK(channel_contract_address().kind == AddressKind::ChannelContract);
}

TEST_CASE("golden transaction bytes and id") {
    // Pinned once from the documented layout; any serialization change that
    // silently alters ids must trip this.
    const auto bytes = serialize(golden_tx());
    CHECK(bytes.size() == 105);
    CHECK(to_hex(tx_id(golden_tx()).digest) ==
          "f1eedbcfa7f89611092e482b21963f6bd63aa66cf2773277361764d4afd695c9");
}

TEST_CASE("identical transactions share an id, any field change breaks it") {
    CHECK(tx_id(golden_tx()) == tx_id(golden_tx()));
    Transaction t = golden_tx();
    t.nonce += 1;
    CHECK(tx_id(t) != tx_id(golden_tx()));
}

TEST_CASE("serialization round-trips every field") {
    Transaction tx = golden_tx();
    tx.fee_meta = 33;
    tx.delta = tx_id(golden_tx());
    tx.payload = PayloadKind::ChannelOpen;
    tx.memo = {0xde, 0xad, 0xbe, 0xef};
    tx.receiver = anyone_can_spend_address();

    auto back = deserialize(serialize(tx));
    REQUIRE(back.has_value());
    CHECK(*back == tx);
}

TEST_CASE("deserialize is strict") {
    auto bytes = serialize(golden_tx());

    SUBCASE("trailing byte") {
        bytes.push_back(0x00);
        CHECK(!deserialize(bytes));
    }
    SUBCASE("truncated") {
        bytes.pop_back();  // golden tx has an empty memo; this eats the length
        CHECK(!deserialize(bytes));
    }
    SUBCASE("unknown version") {
        bytes[0] = 0x02;
        CHECK(!deserialize(bytes));
    }
    SUBCASE("bad address kind") {
        bytes[33] = 9;  // sender kind byte
        CHECK(!deserialize(bytes));
    }
    SUBCASE("bad payload enum") {
        bytes[bytes.size() - 5] = 200;  // payload byte sits before the memo length
        CHECK(!deserialize(bytes));
    }
    SUBCASE("bad delta flag") {
        bytes[91] = 2;  // optional-delta marker
        CHECK(!deserialize(bytes));
    }
    SUBCASE("empty input") { CHECK(!deserialize({})); }
}

TEST_CASE("fee-follower shape test") {
    Transaction t = golden_tx();
    CHECK(!is_meta_fee_follower(t));  // pays native fee
    t.fee_native = 0;
    t.fee_meta = 5;
    CHECK(!is_meta_fee_follower(t));  // no dependency yet
    t.delta = tx_id(golden_tx());
    CHECK(is_meta_fee_follower(t));
    t.fee_meta = 0;
    CHECK(!is_meta_fee_follower(t));
}

TEST_CASE("metatransaction pair validation") {
    Transaction tx0 = golden_tx();
    tx0.fee_native = 0;
    tx0.fee_meta = 0;

    Transaction tx1;
    tx1.sender = tx0.sender;
    tx1.receiver = anyone_can_spend_address();
    tx1.fee_native = 0;
    tx1.fee_meta = 100;
    tx1.delta = tx_id(tx0);
    tx1.nonce = tx0.nonce + 1;
    tx1.payload = PayloadKind::Noop;

    SUBCASE("well-formed pair") {
        CHECK(validate_metatx({tx0, tx1}).ok());
    }
    SUBCASE("action transaction must carry no fees at all") {
        Transaction bad = tx0;
        bad.fee_native = 1;
        auto r = validate_metatx({bad, tx1});
        REQUIRE(!r.ok());
        CHECK(r.error() == MetatxError::NonZeroFeeInTx0);

        bad = tx0;
        bad.fee_meta = 1;
        CHECK(validate_metatx({bad, tx1}).error() == MetatxError::NonZeroFeeInTx0);
    }
    SUBCASE("fee transaction must not pay native") {
        Transaction bad = tx1;
        bad.fee_native = 3;
        CHECK(validate_metatx({tx0, bad}).error() == MetatxError::NativeFeeInTx1);
    }
    SUBCASE("zero meta fee defeats the purpose") {
        Transaction bad = tx1;
        bad.fee_meta = 0;
        CHECK(validate_metatx({tx0, bad}).error() == MetatxError::ZeroMetaFee);
    }
    SUBCASE("delta must point at the paired action") {
        Transaction other = tx0;
        other.amount += 1;
        Transaction bad = tx1;
        bad.delta = tx_id(other);
        CHECK(validate_metatx({tx0, bad}).error() == MetatxError::DanglingDelta);

        bad.delta.reset();
        CHECK(validate_metatx({tx0, bad}).error() == MetatxError::DanglingDelta);
    }
    SUBCASE("fee transaction may stand alone") {
        // The action can already be on chain; only tx1's own shape is checked.
        CHECK(validate_metatx({std::nullopt, tx1}).ok());
    }
}

TEST_CASE("rng: seeded and reproducible") {
    Rng a(123), b(123), c(124);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    bool differs = false;
    Rng a2(123);
    for (int i = 0; i < 100; ++i) differs |= (a2.next_u64() != c.next_u64());
    CHECK(differs);
}

TEST_CASE("rng: uniform01 stays in [0,1) and fills the range") {
    Rng r(7);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 100000; ++i) {
        double u = r.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo < 0.001);
    CHECK(hi > 0.999);
}

TEST_CASE("rng: exponential has the right mean") {
    Rng r(99);
    const double lambda = 2.4045;
    double sum = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) sum += r.exponential(lambda);
    CHECK(sum / n == doctest::Approx(1.0 / lambda).epsilon(0.02));
}

TEST_CASE("rng: below(n) is unbiased over small n") {
    Rng r(5);
    std::array<int, 3> counts{};
    for (int i = 0; i < 90000; ++i) ++counts[r.below(3)];
    for (int c : counts) CHECK(std::abs(c - 30000) < 1200);
}
