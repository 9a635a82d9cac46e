#include "fpp/stats.hpp"

#include <cmath>
#include <tuple>

#include "fpp/errors.hpp"

namespace fpp {

Interval wilson_interval(std::int64_t successes, std::int64_t trials, double z) {
    if (successes < 0 || trials < 0 || successes > trials) throw DomainError("invalid proportion");
    if (trials == 0) return {0, 1};
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
    const double half = z / (1 + z2 / n) * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n));
    // The interval closes exactly at the boundary proportions.
    const double lo = successes == 0 ? 0.0 : std::max(0.0, centre - half);
    const double hi = successes == trials ? 1.0 : std::min(1.0, centre + half);
    return {lo, hi};
}

void MeanSummary::add(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
}

double MeanSummary::variance() const {
    if (count < 2) throw DomainError("variance needs at least two samples");
    return m2 / static_cast<double>(count - 1);
}

std::optional<double> MeanSummary::stderr_of_mean() const {
    if (count < 2) return std::nullopt;
    return std::sqrt(variance() / static_cast<double>(count));
}

MeanSummary merge(const MeanSummary& a, const MeanSummary& b) {
    const bool swap = std::tie(a.count, a.mean, a.m2) > std::tie(b.count, b.mean, b.m2);
    const MeanSummary& x = swap ? b : a;
    const MeanSummary& y = swap ? a : b;
    if (x.count == 0) return y;
    MeanSummary out;
    out.count = x.count + y.count;
    const double n = static_cast<double>(out.count);
    const double delta = y.mean - x.mean;
    out.mean = x.mean + delta * (static_cast<double>(y.count) / n);
    out.m2 = x.m2 + y.m2 + delta * delta * (static_cast<double>(x.count) * static_cast<double>(y.count) / n);
    return out;
}

Aggregator::Kind Aggregator::kind_of(const nlohmann::json& v) {
    if (v.is_null()) return Kind::Unset;
    if (v.is_boolean()) return Kind::Boolean;
    if (v.is_number()) return Kind::Number;
    return Kind::Other;
}

namespace {
bool skipped(const std::string& key) { return key == "seed" || key == "replica"; }
}  // namespace

void Aggregator::add(const nlohmann::json& record) {
    if (!record.is_object()) throw DomainError("records must be JSON objects");
    if (records_ > 0) {
        std::size_t known = 0;
        for (const auto& [key, value] : record.items()) {
            if (skipped(key)) continue;
            if (!columns_.count(key)) throw DomainError("mixed record schemas: unexpected field '" + key + "'");
            ++known;
        }
        if (known != columns_.size()) throw DomainError("mixed record schemas: missing field");
    }
    for (const auto& [key, value] : record.items()) {
        if (skipped(key)) continue;
        Column& col = columns_[key];
        const Kind k = kind_of(value);
        if (k == Kind::Unset) {
            ++col.missing;
            continue;
        }
        if (col.kind != Kind::Unset && col.kind != k)
            throw DomainError("mixed record schemas: field '" + key + "' changes type");
        col.kind = k;
        if (k == Kind::Boolean) {
            ++col.trials;
            col.successes += value.get<bool>();
        } else if (k == Kind::Number) {
            col.summary.add(value.get<double>());
        }
    }
    ++records_;
}

Aggregator merge(const Aggregator& a, const Aggregator& b) {
    if (a.records_ == 0) return b;
    if (b.records_ == 0) return a;
    Aggregator out;
    out.records_ = a.records_ + b.records_;
    for (const auto& [key, col] : a.columns_)
        if (!b.columns_.count(key)) throw DomainError("mixed record schemas: field '" + key + "' missing on one side");
    for (const auto& [key, cb] : b.columns_) {
        const auto it = a.columns_.find(key);
        if (it == a.columns_.end()) throw DomainError("mixed record schemas: field '" + key + "' missing on one side");
        const auto& ca = it->second;
        if (ca.kind != Aggregator::Kind::Unset && cb.kind != Aggregator::Kind::Unset && ca.kind != cb.kind)
            throw DomainError("mixed record schemas: field '" + key + "' changes type");
        Aggregator::Column c;
        c.kind = ca.kind != Aggregator::Kind::Unset ? ca.kind : cb.kind;
        c.successes = ca.successes + cb.successes;
        c.trials = ca.trials + cb.trials;
        c.missing = ca.missing + cb.missing;
        c.summary = merge(ca.summary, cb.summary);
        out.columns_[key] = c;
    }
    return out;
}

nlohmann::json Aggregator::to_json() const {
    nlohmann::json fields = nlohmann::json::object();
    for (const auto& [key, col] : columns_) {
        nlohmann::json f;
        if (col.kind == Kind::Boolean) {
            const auto ci = wilson_interval(col.successes, col.trials);
            f = {{"type", "proportion"},
                 {"successes", col.successes},
                 {"trials", col.trials},
                 {"proportion", col.trials ? static_cast<double>(col.successes) / col.trials : 0.0},
                 {"wilson95", {ci.lo, ci.hi}}};
        } else if (col.kind == Kind::Number) {
            const auto se = col.summary.stderr_of_mean();
            f = {{"type", "mean"},
                 {"count", col.summary.count},
                 {"mean", col.summary.mean},
                 {"stderr", se ? nlohmann::json(*se) : nlohmann::json(nullptr)}};
        } else {
            continue;
        }
        if (col.missing) f["missing"] = col.missing;
        fields[key] = std::move(f);
    }
    return {{"records", records_}, {"fields", fields}};
}

nlohmann::json aggregate(std::span<const nlohmann::json> records) {
    Aggregator agg;
    for (const auto& r : records) agg.add(r);
    return agg.to_json();
}

}  // namespace fpp
