#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>

#include "json.hpp"

namespace fpp {

inline constexpr double kZ95 = 1.959963984540054;

struct Interval {
    double lo = 0;
    double hi = 0;
};

/// Wilson score interval for `successes` out of `trials`; [0, 1] when trials is 0.
Interval wilson_interval(std::int64_t successes, std::int64_t trials, double z = kZ95);

/// Streaming (count, mean, M2) summary.
struct MeanSummary {
    std::int64_t count = 0;
    double mean = 0;
    double m2 = 0;

    void add(double x);
    /// Sample variance; requires count >= 2.
    double variance() const;
    /// Standard error of the mean; empty when count < 2.
    std::optional<double> stderr_of_mean() const;

    bool operator==(const MeanSummary&) const = default;
};

/// Pairwise combination. Operands are put in a canonical order first, so
/// merge(a, b) and merge(b, a) are bit-identical.
MeanSummary merge(const MeanSummary& a, const MeanSummary& b);

/// Column-wise aggregation of flat JSON records sharing one schema. Boolean
/// fields become proportions, numeric fields become mean summaries, null
/// entries are skipped, and other fields are ignored. Keys listed in
/// `skip` (seed, replica) never aggregate.
class Aggregator {
public:
    Aggregator() = default;

    void add(const nlohmann::json& record);
    std::int64_t records() const { return records_; }
    nlohmann::json to_json() const;

    friend Aggregator merge(const Aggregator& a, const Aggregator& b);
    bool operator==(const Aggregator&) const = default;

private:
    enum class Kind { Unset, Boolean, Number, Other };
    struct Column {
        Kind kind = Kind::Unset;
        std::int64_t successes = 0;
        std::int64_t trials = 0;
        std::int64_t missing = 0;
        MeanSummary summary;
        bool operator==(const Column&) const = default;
    };
    static Kind kind_of(const nlohmann::json& v);

    std::int64_t records_ = 0;
    std::map<std::string, Column> columns_;
};

Aggregator merge(const Aggregator& a, const Aggregator& b);

/// Aggregates `records` in order; throws DomainError on mixed schemas.
nlohmann::json aggregate(std::span<const nlohmann::json> records);

}  // namespace fpp
