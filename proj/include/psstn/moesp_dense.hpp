#pragma once

#include "psstn/config.hpp"
#include "psstn/tnmoesp.hpp"

namespace psstn {

/// Conventional MOESP with the km^d x N input block Hankel matrix formed
/// explicitly. Refuses with SizeGuardError when that matrix would exceed
/// `guard` entries. The returned model carries [D; B] as a network built
/// from the dense solution.
Identification moesp_identify_dense(const SignalLog& log, int d, const OrderSpec& order = OrderSpec::threshold(),
                                    std::uint64_t guard = dense_guard());

}  // namespace psstn
