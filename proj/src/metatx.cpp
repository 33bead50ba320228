#include "metasim/metatx.hpp"

namespace metasim {

Result<Unit, MetatxError> validate_metatx(const Metatransaction& m) {
    if (m.tx0 && (m.tx0->fee_native != 0 || m.tx0->fee_meta != 0))
        return MetatxError::NonZeroFeeInTx0;
    if (m.tx1.fee_native != 0) return MetatxError::NativeFeeInTx1;
    if (m.tx1.fee_meta == 0) return MetatxError::ZeroMetaFee;
    if (m.tx0 && (!m.tx1.delta || *m.tx1.delta != tx_id(*m.tx0)))
        return MetatxError::DanglingDelta;
    return Unit{};
}

}  // namespace metasim
