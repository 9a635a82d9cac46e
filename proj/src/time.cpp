#include "fpp/time.hpp"

#include <cmath>
#include <cstdio>

#include "fpp/errors.hpp"

namespace fpp {

Time Time::from_double(double w) {
    if (!std::isfinite(w) || std::fabs(w) >= 0x1p62)
        throw DomainError("passage time out of fixed-point range");
    const double scaled = std::ldexp(w, kFractionBits);
    if (scaled != std::nearbyint(scaled))
        throw DomainError("value is not on the 2^-64 grid");
    return from_ticks(static_cast<Int128>(scaled));
}

double Time::to_double() const {
    if (is_infinite()) return HUGE_VAL;
    return std::ldexp(static_cast<double>(ticks_), -kFractionBits);
}

double quantize_weight(double w) {
    return std::ldexp(std::nearbyint(std::ldexp(w, Time::kFractionBits)), -Time::kFractionBits);
}

std::string to_string(Time t) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", t.to_double());
    return buf;
}

}  // namespace fpp
