#ifndef LOCALCLT_RATIONAL_HPP
#define LOCALCLT_RATIONAL_HPP

#include <boost/multiprecision/cpp_int.hpp>

namespace localclt {

// Exact arithmetic backend for the moment/cumulant algebra. The conversion
// and Hankel code is generic in the scalar type; tests run it with Rational
// to pin down exact values through order 12.
using Rational = boost::multiprecision::cpp_rational;

}  // namespace localclt

#endif
