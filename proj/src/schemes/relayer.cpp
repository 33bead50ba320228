#include "metasim/schemes/relayer.hpp"

namespace metasim::schemes {

Result<std::optional<std::pair<Transaction, Transaction>>, RelayerError>
relayer_submit(const RelayerRequest& req, const Address& relayer, bool honest,
               const chain::Ledger& ledger, std::uint64_t relayer_fee_native) {
    if (req.meta_fee_offered == 0) return RelayerError::ZeroMetaFeeOffered;
    if (!honest) return std::optional<std::pair<Transaction, Transaction>>{};

    const Address fee_payer =
        req.fee_payer == FeePayer::Sender ? req.sender : req.target;

    // Both legs are checked before either is emitted: a relayer that cannot
    // front the fee, or a fee payer that cannot reimburse, kills the pair.
    if (ledger.native_of(relayer) < relayer_fee_native)
        return RelayerError::RelayerInsufficientNativeFunds;
    if (ledger.meta_of(fee_payer) < req.meta_fee_offered)
        return RelayerError::FeePayerInsufficientMetaFunds;

    Transaction action;
    action.sender = relayer;
    action.receiver = req.target;
    action.fee_native = relayer_fee_native;
    action.nonce = ledger.nonce_of(relayer);
    action.payload = req.action;

    Transaction reimburse;
    reimburse.sender = fee_payer;
    reimburse.receiver = relayer;
    reimburse.fee_meta = req.meta_fee_offered;
    reimburse.delta = tx_id(action);
    reimburse.nonce = ledger.nonce_of(fee_payer);
    reimburse.payload = PayloadKind::Noop;

    return std::optional{std::pair{action, reimburse}};
}

}  // namespace metasim::schemes
