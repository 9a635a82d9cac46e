#include "fpp/weights.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "fpp/errors.hpp"

namespace fpp {

namespace {
bool positive_finite(double x) { return std::isfinite(x) && x > 0; }
}  // namespace

WeightSpec WeightSpec::exponential(double rate) {
    if (!positive_finite(rate)) throw ConfigError("exponential rate must be positive");
    return {WeightFamily::Exponential, rate, 0};
}

WeightSpec WeightSpec::uniform(double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b) || a < 0 || b <= a)
        throw ConfigError("uniform weights need 0 <= a < b");
    return {WeightFamily::Uniform, a, b};
}

WeightSpec WeightSpec::shifted_power(double shift, double alpha) {
    if (!std::isfinite(shift) || shift < 0) throw ConfigError("shifted-power shift must be >= 0");
    if (!positive_finite(alpha)) throw ConfigError("shifted-power alpha must be positive");
    return {WeightFamily::ShiftedPower, shift, alpha};
}

WeightSpec WeightSpec::constant(double c) {
    if (!positive_finite(c)) throw ConfigError("constant weight must be positive");
    return {WeightFamily::Constant, c, 0};
}

WeightSpec WeightSpec::from_parts(std::uint32_t family_id, double p0, double p1) {
    switch (static_cast<WeightFamily>(family_id)) {
        case WeightFamily::Exponential: return exponential(p0);
        case WeightFamily::Uniform: return uniform(p0, p1);
        case WeightFamily::ShiftedPower: return shifted_power(p0, p1);
        case WeightFamily::Constant: return constant(p0);
    }
    throw ConfigError("unknown weight family id " + std::to_string(family_id));
}

bool WeightSpec::min_moment_finite(int d) const {
    (void)d;
    switch (family_) {
        // P(Y > t) = P(w > t)^{2d} ~ t^{-2 d alpha}; E[Y^d] < inf iff 2 d alpha > d.
        case WeightFamily::ShiftedPower: return p1_ > 0.5;
        default: return true;
    }
}

bool WeightSpec::exponential_moment_finite() const { return family_ != WeightFamily::ShiftedPower; }

double WeightSpec::quantile(double u) const {
    switch (family_) {
        case WeightFamily::Exponential: return -std::log1p(-u) / p0_;
        case WeightFamily::Uniform: return p0_ + (p1_ - p0_) * u;
        case WeightFamily::ShiftedPower: return p0_ + std::expm1(-std::log1p(-u) / p1_);
        case WeightFamily::Constant: return p0_;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

double WeightSpec::cdf(double w) const {
    switch (family_) {
        case WeightFamily::Exponential: return w <= 0 ? 0.0 : -std::expm1(-p0_ * w);
        case WeightFamily::Uniform: return w <= p0_ ? 0.0 : w >= p1_ ? 1.0 : (w - p0_) / (p1_ - p0_);
        case WeightFamily::ShiftedPower: return w <= p0_ ? 0.0 : 1.0 - std::pow(1.0 + (w - p0_), -p1_);
        case WeightFamily::Constant: return w < p0_ ? 0.0 : 1.0;
    }
    return 0;
}

double WeightSpec::mean() const {
    switch (family_) {
        case WeightFamily::Exponential: return 1.0 / p0_;
        case WeightFamily::Uniform: return 0.5 * (p0_ + p1_);
        case WeightFamily::ShiftedPower:
            return p1_ > 1 ? p0_ + 1.0 / (p1_ - 1) : std::numeric_limits<double>::infinity();
        case WeightFamily::Constant: return p0_;
    }
    return 0;
}

double WeightSpec::variance() const {
    switch (family_) {
        case WeightFamily::Exponential: return 1.0 / (p0_ * p0_);
        case WeightFamily::Uniform: return (p1_ - p0_) * (p1_ - p0_) / 12.0;
        case WeightFamily::ShiftedPower:
            return p1_ > 2 ? p1_ / ((p1_ - 1) * (p1_ - 1) * (p1_ - 2)) : std::numeric_limits<double>::infinity();
        case WeightFamily::Constant: return 0;
    }
    return 0;
}

std::string WeightSpec::name() const {
    switch (family_) {
        case WeightFamily::Exponential: return "exponential";
        case WeightFamily::Uniform: return "uniform";
        case WeightFamily::ShiftedPower: return "shifted-power";
        case WeightFamily::Constant: return "constant";
    }
    return "?";
}

std::string WeightSpec::describe() const {
    std::ostringstream os;
    os.precision(17);
    os << name() << '(';
    switch (family_) {
        case WeightFamily::Exponential: os << "rate=" << p0_; break;
        case WeightFamily::Uniform: os << "a=" << p0_ << ",b=" << p1_; break;
        case WeightFamily::ShiftedPower: os << "shift=" << p0_ << ",alpha=" << p1_; break;
        case WeightFamily::Constant: os << "c=" << p0_; break;
    }
    os << ')';
    return os.str();
}

}  // namespace fpp
