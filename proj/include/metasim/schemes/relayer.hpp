#pragma once

#include <optional>
#include <utility>

#include "metasim/ledger.hpp"
#include "metasim/result.hpp"
#include "metasim/tx.hpp"

namespace metasim::schemes {

enum class FeePayer : std::uint8_t { Sender = 0, Receiver = 1 };

// Off-chain request a sender hands to a relayer: "put this action on chain
// for me, paying the native fee yourself; whoever is named here reimburses
// you in the meta currency".
struct RelayerRequest {
    Address sender;
    Address target;
    PayloadKind action = PayloadKind::Noop;
    std::uint64_t meta_fee_offered = 0;  // must be > 0
    FeePayer fee_payer = FeePayer::Sender;
};

enum class RelayerError {
    RelayerInsufficientNativeFunds,
    FeePayerInsufficientMetaFunds,
    ZeroMetaFeeOffered,
};

// If the relayer cooperates, returns the pair (action tx funded by the
// relayer's native fee, reimbursement pinned to it). A nullopt result models
// censorship: the relayer simply drops the request. Either insufficient
// balance aborts the whole pair — nothing is emitted.
Result<std::optional<std::pair<Transaction, Transaction>>, RelayerError>
relayer_submit(const RelayerRequest& req, const Address& relayer, bool honest,
               const chain::Ledger& ledger, std::uint64_t relayer_fee_native);

}  // namespace metasim::schemes
