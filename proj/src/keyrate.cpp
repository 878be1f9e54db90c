// Copyright 2026 The hdqkd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hdqkd/keyrate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hdqkd/error.hpp"
#include "hdqkd/mub.hpp"

namespace hdqkd::keyrate {

namespace {

constexpr double kBracketLow = 1e-12;
constexpr double kBracketHigh = 1.0 - 1e-6;
constexpr double kRootTolerance = 1e-9;
constexpr int kMaxBisection = 200;
constexpr int kScanPoints = 4096;

// p log2 p with the 0 log 0 = 0 convention.
double xlog2(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

void require_dimension(int d) {
    if (d < 2) throw Error(ErrorKind::DomainError, "dimension must be >= 2, got " + std::to_string(d));
}

int require_square(int d) {
    const int side = mub::exact_sqrt(d);
    if (d < 4 || side < 2) {
        throw Error(ErrorKind::InvalidDimension,
                    "block-biased entropy needs a perfect square d >= 4, got " + std::to_string(d));
    }
    return side;
}

double domain_limit(Bound bound, int d) {
    if (bound == Bound::DepolarizingAllMubs) {
        return std::min(kBracketHigh, static_cast<double>(d) / (d + 1.0) - 1e-12);
    }
    return kBracketHigh;
}

}  // namespace

std::string_view to_string(Bound bound) {
    switch (bound) {
        case Bound::DepolarizingAllMubs: return "depolarizing_all_mubs";
        case Bound::TwoMubUniform: return "two_mub_uniform";
        case Bound::TwoMubBlock: return "two_mub_block";
    }
    return "unknown";
}

Bound bound_from_string(std::string_view text) {
    if (text == "depolarizing" || text == "depolarizing_all_mubs" || text == "depolarizing-all-mubs") {
        return Bound::DepolarizingAllMubs;
    }
    if (text == "two-mub-uniform" || text == "two_mub_uniform") return Bound::TwoMubUniform;
    if (text == "two-mub-block" || text == "two_mub_block") return Bound::TwoMubBlock;
    throw Error(ErrorKind::InvalidConfig, "unknown bound '" + std::string(text) + "'");
}

double shannon_hd(double x, int d) {
    require_dimension(d);
    if (!(x >= 0.0) || !(x < 1.0)) {
        std::ostringstream msg;
        msg << "h_d argument must lie in [0, 1), got " << x;
        throw Error(ErrorKind::DomainError, msg.str());
    }
    // -x log2(x/(d-1)) = -x log2 x + x log2(d-1)
    return -xlog2(x) + x * std::log2(d - 1.0) - xlog2(1.0 - x);
}

double entropy_block_biased(int d, double uniform_error, double block_error) {
    const int side = require_square(d);
    if (!(uniform_error >= 0.0) || !(block_error >= 0.0)) {
        throw Error(ErrorKind::DomainError, "error rates must be non-negative");
    }
    const double total = uniform_error + block_error;
    if (!(total < 1.0)) throw Error(ErrorKind::DomainError, "total error must be below 1");
    const double per_uniform = uniform_error / (d - 1.0);
    const double per_block = block_error / (side - 1.0) + per_uniform;
    return -xlog2(1.0 - total) - (d - side) * xlog2(per_uniform) - (side - 1.0) * xlog2(per_block);
}

double rate_at(Bound bound, int d, double total_error, SplitProfile profile) {
    require_dimension(d);
    const double log_d = std::log2(static_cast<double>(d));
    switch (bound) {
        case Bound::DepolarizingAllMubs: {
            if (!(total_error >= 0.0)) throw Error(ErrorKind::DomainError, "error must be non-negative");
            const double scaled = (d + 1.0) / d * total_error;
            return log_d - shannon_hd(scaled, d) - scaled * std::log2(d + 1.0);
        }
        case Bound::TwoMubUniform:
            return log_d - 2.0 * shannon_hd(total_error, d);
        case Bound::TwoMubBlock: {
            if (!(profile.block_fraction >= 0.0) || !(profile.block_fraction <= 1.0)) {
                throw Error(ErrorKind::DomainError, "block fraction must lie in [0, 1]");
            }
            const double block = total_error * profile.block_fraction;
            if (block == 0.0) return log_d - 2.0 * shannon_hd(total_error, d);
            return log_d - 2.0 * entropy_block_biased(d, total_error - block, block);
        }
    }
    return 0.0;
}

ThresholdResult threshold(Bound bound, int d, SplitProfile profile) {
    const auto rate = [&](double e) { return rate_at(bound, d, e, profile); };
    const double lo = kBracketLow;
    const double hi = domain_limit(bound, d);
    if (!(rate(lo) > 0.0)) {
        throw Error(ErrorKind::NoThreshold, "rate is not positive at zero error");
    }

    ThresholdResult result;
    const double step = (hi - lo) / kScanPoints;
    double prev_e = lo;
    double prev_r = rate(lo);
    double best_e = lo;
    double best_r = prev_r;
    bool monotone_to_best = true;
    for (int i = 1; i <= kScanPoints; ++i) {
        const double e = i == kScanPoints ? hi : lo + i * step;
        const double r = rate(e);
        if (r > prev_r + 1e-12) result.monotone = false;
        if (r <= 0.0) {
            // Sign change inside [prev_e, e]: bisect.
            double a = prev_e;
            double b = e;
            double mid = 0.5 * (a + b);
            for (int it = 0; it < kMaxBisection; ++it) {
                mid = 0.5 * (a + b);
                const double rm = rate(mid);
                if (std::abs(rm) < kRootTolerance) break;
                if (rm > 0.0) a = mid; else b = mid;
            }
            result.value = mid;
            return result;
        }
        if (r < best_r) {
            best_r = r;
            best_e = e;
            monotone_to_best = result.monotone;
        }
        prev_e = e;
        prev_r = r;
    }

    // No sign change. The rate may still touch zero at a minimum (all errors
    // inside one block does this at E = 1 - 1/sqrt(d)); refine the smallest
    // scanned value by golden-section search.
    double a = std::max(lo, best_e - step);
    double b = std::min(hi, best_e + step);
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double e2 = a + inv_phi * (b - a);
    double rc = rate(c);
    double re = rate(e2);
    for (int it = 0; it < kMaxBisection && (b - a) > 1e-15; ++it) {
        if (rc < re) {
            b = e2;
            e2 = c;
            re = rc;
            c = b - inv_phi * (b - a);
            rc = rate(c);
        } else {
            a = c;
            c = e2;
            rc = re;
            e2 = a + inv_phi * (b - a);
            re = rate(e2);
        }
    }
    const double touch = 0.5 * (a + b);
    if (std::abs(rate(touch)) < kRootTolerance) {
        result.value = touch;
        result.tangent = true;
        result.monotone = monotone_to_best;
        return result;
    }
    std::ostringstream msg;
    msg << to_string(bound) << " at d=" << d << " never reaches zero (minimum rate " << best_r << ")";
    throw Error(ErrorKind::NoThreshold, msg.str());
}

KeyRateReport rate_depolarizing(int d, double mean_error) {
    KeyRateReport report;
    report.bound = Bound::DepolarizingAllMubs;
    report.d = d;
    report.total_error = mean_error;
    report.uniform_error = mean_error;
    report.rate = rate_at(Bound::DepolarizingAllMubs, d, mean_error);
    report.threshold = threshold(Bound::DepolarizingAllMubs, d);
    report.margin = report.threshold.value - mean_error;
    return report;
}

KeyRateReport rate_two_mub(int d, double uniform_error, double block_error) {
    if (!(uniform_error >= 0.0) || !(block_error >= 0.0)) {
        throw Error(ErrorKind::DomainError, "error rates must be non-negative");
    }
    KeyRateReport report;
    report.d = d;
    report.uniform_error = uniform_error;
    report.block_error = block_error;
    report.total_error = uniform_error + block_error;
    if (block_error == 0.0) {
        report.bound = Bound::TwoMubUniform;
        report.rate = rate_at(Bound::TwoMubUniform, d, uniform_error);
        report.threshold = threshold(Bound::TwoMubUniform, d);
    } else {
        report.bound = Bound::TwoMubBlock;
        report.rate = std::log2(static_cast<double>(d)) - 2.0 * entropy_block_biased(d, uniform_error, block_error);
        report.threshold = threshold(Bound::TwoMubBlock, d, SplitProfile{block_error / report.total_error});
    }
    report.margin = report.threshold.value - report.total_error;
    return report;
}

std::vector<CurvePoint> rate_curve(Bound bound, int d, std::span<const double> errors,
                                   SplitProfile profile) {
    const double fraction = bound == Bound::TwoMubBlock ? profile.block_fraction : 0.0;
    std::vector<CurvePoint> curve;
    curve.reserve(errors.size());
    for (double e : errors) {
        CurvePoint p;
        p.total_error = e;
        p.block_error = e * fraction;
        p.uniform_error = e - p.block_error;
        p.rate = rate_at(bound, d, e, profile);
        curve.push_back(p);
    }
    return curve;
}

SubsetStats subset_stats(const protocol::ProbabilityTable &table) {
    if (table.alice_bases() != table.bob_bases()) {
        throw Error(ErrorKind::InvalidInput, "subset statistics need the same number of bases per party");
    }
    table.validate();
    const int d = table.dim();
    const int K = table.alice_bases();
    SubsetStats stats;
    stats.dim = d;
    stats.bases = K;
    stats.basis_error.resize(static_cast<std::size_t>(K));
    stats.setting_error.resize(static_cast<std::size_t>(K) * K);
    stats.matched_probs.resize(static_cast<std::size_t>(K) * d * d);
    stats.all_probs.assign(table.values().begin(), table.values().end());
    double correct_sum = 0.0;
    for (int k = 0; k < K; ++k) {
        for (int l = 0; l < K; ++l) {
            double correct = 0.0;
            for (int a = 0; a < d; ++a) correct += table(a, a, k, l);
            stats.setting_error[static_cast<std::size_t>(k) * K + l] = 1.0 - correct;
            if (k == l) {
                stats.basis_error[static_cast<std::size_t>(k)] = 1.0 - correct;
                correct_sum += correct;
            }
        }
        for (int a = 0; a < d; ++a) {
            for (int b = 0; b < d; ++b) {
                stats.matched_probs[(static_cast<std::size_t>(k) * d + a) * d + b] = table(a, b, k, k);
            }
        }
    }
    stats.mean_error = 1.0 - correct_sum / K;
    return stats;
}

}  // namespace hdqkd::keyrate
