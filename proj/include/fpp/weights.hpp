#pragma once

#include <cstdint>
#include <string>

namespace fpp {

enum class WeightFamily : std::uint32_t {
    Exponential = 1,   // rate
    Uniform = 2,       // a, b with 0 <= a < b
    ShiftedPower = 3,  // shift + (U^{-1/alpha} - 1): Lomax tail, index alpha
    Constant = 4,      // c; atomic, oracle use only
};

/// Edge-weight distribution with declared moment flags.
class WeightSpec {
public:
    static WeightSpec exponential(double rate);
    static WeightSpec uniform(double a, double b);
    static WeightSpec shifted_power(double shift, double alpha);
    static WeightSpec constant(double c);
    /// Rebuild from persisted (family id, parameters); validates.
    static WeightSpec from_parts(std::uint32_t family_id, double p0, double p1);

    WeightFamily family() const { return family_; }
    double param0() const { return p0_; }
    double param1() const { return p1_; }

    bool is_continuous() const { return family_ != WeightFamily::Constant; }
    /// E[Y^d] < infinity, Y the minimum of the 2d weights at a vertex.
    bool min_moment_finite(int d) const;
    /// E[exp(a w)] < infinity for some a > 0.
    bool exponential_moment_finite() const;

    /// Inverse-CDF transform of u in (0, 1).
    double quantile(double u) const;
    double cdf(double w) const;
    double mean() const;
    double variance() const;

    std::string name() const;
    std::string describe() const;
    bool operator==(const WeightSpec&) const = default;

private:
    WeightSpec(WeightFamily f, double p0, double p1) : family_(f), p0_(p0), p1_(p1) {}
    WeightFamily family_ = WeightFamily::Constant;
    double p0_ = 1, p1_ = 0;
};

}  // namespace fpp
