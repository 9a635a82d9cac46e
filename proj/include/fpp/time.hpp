#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace fpp {

__extension__ using Int128 = __int128;

/// Passage time held as an exact binary fixed-point number (64 fractional bits).
///
/// Edge weights are doubles on the 2^-64 grid, so every path sum, passage-time
/// difference and Busemann increment is exact: symmetry T(x,y) = T(y,x),
/// cocycle identities and geodesic additivity hold bit-for-bit regardless of
/// summation order.
class Time {
public:
    static constexpr int kFractionBits = 64;

    constexpr Time() = default;

    /// Exact conversion. `w` must be a finite multiple of 2^-64 with |w| < 2^62.
    static Time from_double(double w);
    static constexpr Time from_ticks(Int128 ticks) { Time t; t.ticks_ = ticks; return t; }
    static constexpr Time zero() { return Time{}; }
    static constexpr Time infinity() {
        return from_ticks(static_cast<Int128>((~static_cast<unsigned __int128>(0)) >> 2));
    }

    [[nodiscard]] double to_double() const;
    [[nodiscard]] constexpr Int128 ticks() const { return ticks_; }
    [[nodiscard]] constexpr bool is_infinite() const { return ticks_ >= infinity().ticks_; }

    constexpr Time& operator+=(Time o) { ticks_ += o.ticks_; return *this; }
    constexpr Time& operator-=(Time o) { ticks_ -= o.ticks_; return *this; }
    friend constexpr Time operator+(Time a, Time b) { return a += b; }
    friend constexpr Time operator-(Time a, Time b) { return a -= b; }
    friend constexpr Time operator-(Time a) { return from_ticks(-a.ticks_); }
    friend constexpr auto operator<=>(Time a, Time b) = default;
    friend constexpr Time abs(Time a) { return a.ticks_ < 0 ? -a : a; }

private:
    Int128 ticks_ = 0;
};

/// Round a double onto the 2^-64 grid (identity for |w| >= 2^-11).
double quantize_weight(double w);

std::string to_string(Time t);

}  // namespace fpp
