#pragma once

// 100-digit binary floating point usable as an Eigen scalar. Expression
// templates are off so Eigen sees a plain value type.

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/eigen.hpp>

namespace bdt {

using HighPrecision =
    boost::multiprecision::number<boost::multiprecision::cpp_bin_float<100>, boost::multiprecision::et_off>;

}  // namespace bdt
