#pragma once

#include <optional>

#include "metasim/result.hpp"
#include "metasim/tx.hpp"

namespace metasim {

// A pair of transactions where every fee is paid in the meta currency: tx0
// carries the sender's actual action with zero fees, tx1 carries the fee and
// is pinned to tx0. tx0 may be absent (a bare fee payment).
struct Metatransaction {
    std::optional<Transaction> tx0;
    Transaction tx1;
};

enum class MetatxError {
    NonZeroFeeInTx0,  // tx0 must pay no fee in either currency
    NativeFeeInTx1,   // tx1 must not touch the native fee market
    ZeroMetaFee,      // tx1's whole purpose is the meta fee
    DanglingDelta,    // tx1.delta must reference tx0 (when tx0 is present)
};

// Checks the structural constraints above. Pure; does not consult a ledger.
Result<Unit, MetatxError> validate_metatx(const Metatransaction& m);

}  // namespace metasim
