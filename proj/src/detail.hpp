#pragma once

#include "cmc/measure.hpp"

namespace cmc::detail {

// Implemented in codec.cpp.
Rational eval_coded(const expr::Coded& coded, const Bitstring& s);

}  // namespace cmc::detail
