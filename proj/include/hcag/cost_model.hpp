#pragma once
// Cost model for hierarchical abstraction over a perfect (B, L) tree with
// compression depth C. Analytic costs, crossover thresholds, the optimal
// compression depth and the compression-advantage threshold are computed in
// exact rational arithmetic; a Monte-Carlo traversal simulator serves as an
// independent oracle for the closed forms.

#include <cmath>
#include <random>
#include <unordered_set>

#include "hcag/kb.hpp"
#include "hcag/rational.hpp"

namespace hcag {

struct CostParams {
    std::int64_t B = 2;       // branching factor >= 1
    std::int64_t L = 3;       // tree depth >= 1 (root = level 1)
    std::int64_t C = 2;       // compression depth in [1, L]
    Rational c_a = 2;         // detailed summary unit cost
    Rational c_c = 1;         // compressed summary unit cost, c_c < c_a
    Rational c_j = {1, 2};    // judgment unit cost
    std::int64_t R = 1;       // relevant files per query
    std::int64_t Q = 0;       // query count
    Rational N_bar = 1;       // subtasks per query
    Rational p_gap = 0;       // probability a query touches no compressed region

    void validate() const {
        if (B < 1) throw Error("B must be >= 1");
        if (L < 1) throw Error("L must be >= 1");
        if (C < 1 || C > L) throw Error("C must be in [1, L]");
        if (!(Rational(0) < c_a)) throw Error("c_a must be positive");
        if (!(Rational(0) < c_c && c_c < c_a)) throw Error("need 0 < c_c < c_a");
        if (!(Rational(0) < c_j)) throw Error("c_j must be positive");
        if (R < 0) throw Error("R must be >= 0");
        if (Q < 0) throw Error("Q must be >= 0");
        if (N_bar < Rational(1)) throw Error("N_bar must be >= 1");
        if (p_gap < Rational(0) || p_gap > Rational(1)) throw Error("p_gap must be in [0, 1]");
    }

    json to_json() const {
        return json{{"B", B},         {"L", L},           {"C", C},
                    {"N_bar", N_bar.str()}, {"Q", Q},     {"R", R},
                    {"c_a", c_a.str()},     {"c_c", c_c.str()}, {"c_j", c_j.str()},
                    {"p_gap", p_gap.str()}};
    }

    static Rational rational_field(const json& j, const char* key, Rational fallback) {
        if (!j.contains(key)) return fallback;
        const auto& v = j.at(key);
        if (v.is_string()) return Rational::parse(v.get<std::string>());
        if (v.is_number_integer()) return Rational(v.get<std::int64_t>());
        throw ParseError(std::string("cost param ") + key + " must be an integer or a rational string");
    }

    static CostParams from_json(const json& j) {
        CostParams p;
        p.B = j.value("B", p.B);
        p.L = j.value("L", p.L);
        p.C = j.value("C", p.C);
        p.R = j.value("R", p.R);
        p.Q = j.value("Q", p.Q);
        p.c_a = rational_field(j, "c_a", p.c_a);
        p.c_c = rational_field(j, "c_c", p.c_c);
        p.c_j = rational_field(j, "c_j", p.c_j);
        p.N_bar = rational_field(j, "N_bar", p.N_bar);
        p.p_gap = rational_field(j, "p_gap", p.p_gap);
        p.validate();
        return p;
    }
};

enum class CostMethod { HCAG, Flat, LeafOnly };

inline std::string to_string(CostMethod m) {
    switch (m) {
        case CostMethod::HCAG: return "hcag";
        case CostMethod::Flat: return "flat";
        case CostMethod::LeafOnly: return "leaf_only";
    }
    return "?";
}

struct CostReport {
    Rational offline;          // one-time cost
    Rational per_query_slope;  // S
    Rational intercept;        // I (== offline)
    Rational total;            // I + Q * S, exactly
    CostMethod method = CostMethod::HCAG;
};

namespace costdetail {

inline std::int64_t detailed_nodes(std::int64_t B, std::int64_t L, std::int64_t C) {
    return C > 1 ? node_count_at_levels(B, L, 1, C - 1) : 0;
}
inline std::int64_t compressed_nodes(std::int64_t B, std::int64_t L, std::int64_t C) {
    return node_count_at_levels(B, L, C, L);
}

}  // namespace costdetail

// Offline: c_a (B^{C-1}-1)/(B-1) + c_c (B^L - B^{C-1})/(B-1); per-query
// slope: c_j R L + c_a R (L - C + 1). B = 1 is handled through the level
// counts' limits.
inline CostReport hcag_cost(const CostParams& p) {
    p.validate();
    CostReport r;
    r.method = CostMethod::HCAG;
    r.offline = p.c_a * Rational(costdetail::detailed_nodes(p.B, p.L, p.C)) +
                p.c_c * Rational(costdetail::compressed_nodes(p.B, p.L, p.C));
    r.per_query_slope = p.c_j * Rational(p.R) * Rational(p.L) +
                        p.c_a * Rational(p.R) * Rational(p.L - p.C + 1);
    r.intercept = r.offline;
    r.total = r.intercept + Rational(p.Q) * r.per_query_slope;
    return r;
}

// Flat retrieval: no offline cost, every query judges all B^{L-1} leaves.
inline CostReport flat_cost(const CostParams& p) {
    p.validate();
    CostReport r;
    r.method = CostMethod::Flat;
    r.offline = 0;
    r.intercept = 0;
    r.per_query_slope = p.c_j * Rational(checked_ipow(p.B, p.L - 1));
    r.total = Rational(p.Q) * r.per_query_slope;
    return r;
}

// Leaf-only summarization: summarize every leaf up front, then scan all leaf
// summaries per query.
inline CostReport leaf_only_cost(const CostParams& p) {
    p.validate();
    CostReport r;
    r.method = CostMethod::LeafOnly;
    std::int64_t leaves = checked_ipow(p.B, p.L - 1);
    r.offline = p.c_a * Rational(leaves);
    r.intercept = r.offline;
    r.per_query_slope = p.c_j * Rational(leaves);
    r.total = r.intercept + Rational(p.Q) * r.per_query_slope;
    return r;
}

// ---------------------------------------------------------------------------
// Thresholds

struct Threshold {
    Rational q_star;      // intersection of the two cost lines
    bool exists = false;  // a beats b for all large Q
    bool degenerate_equal_slopes = false;  // equal slopes with I_a >= I_b
};

// Where do the lines I + Q*S cross, and does `a` win beyond it?
inline Threshold crossover_threshold(const CostReport& a, const CostReport& b) {
    Threshold t;
    if (a.per_query_slope == b.per_query_slope) {
        t.degenerate_equal_slopes = a.intercept >= b.intercept;
        return t;
    }
    if (a.per_query_slope > b.per_query_slope) return t;
    t.exists = true;
    t.q_star = (a.intercept - b.intercept) / (b.per_query_slope - a.per_query_slope);
    return t;
}

// Q_th = max{Q_1, Q_2, ...} over all configured baselines; exists only when
// HCAG's slope undercuts every one of them.
inline Threshold overall_threshold(const CostReport& hcag, const std::vector<CostReport>& baselines) {
    Threshold out;
    bool first = true;
    for (const auto& b : baselines) {
        Threshold t = crossover_threshold(hcag, b);
        if (!t.exists) {
            out.exists = false;
            out.degenerate_equal_slopes = out.degenerate_equal_slopes || t.degenerate_equal_slopes;
            return out;
        }
        if (first || t.q_star > out.q_star) out.q_star = t.q_star;
        first = false;
    }
    out.exists = !first;
    return out;
}

struct OptimalDepth {
    double c_star_continuous = 1.0;
    std::int64_t c_star_integer = 1;
};

// Continuous optimum 1 + log_B(Q c_a R (B-1) / ((c_a - c_c) ln B)) clamped to
// [1, L]; integer optimum by exact grid search (ties to the smaller C).
inline OptimalDepth optimal_compression_depth(const CostParams& p) {
    p.validate();
    OptimalDepth out;

    Rational best_total;
    for (std::int64_t c = 1; c <= p.L; ++c) {
        CostParams q = p;
        q.C = c;
        Rational total = hcag_cost(q).total;
        if (c == 1 || total < best_total) {
            best_total = total;
            out.c_star_integer = c;
        }
    }

    if (p.B >= 2) {
        Rational arg = Rational(p.Q) * p.c_a * Rational(p.R) * Rational(p.B - 1) / (p.c_a - p.c_c);
        double log_b = std::log(static_cast<double>(p.B));
        double x = arg.to_double() / log_b;
        double c = x <= 0.0 ? 1.0 : 1.0 + std::log(x) / log_b;
        out.c_star_continuous = std::clamp(c, 1.0, static_cast<double>(p.L));
    } else {
        out.c_star_continuous = static_cast<double>(out.c_star_integer);
    }
    return out;
}

struct CompressionAdvantage {
    Rational p0;
    bool exists = false;
    Rational offline_saving;    // (c_a - c_c)(B^L - B^{C-1})/(B-1)
    Rational surcharge_slope;   // Q c_a N_bar R (L - C + 1), the coefficient of (1 - p_gap)
};

// Compression vs full detailed summarization. The expansion surcharge uses
// E[K] = N_bar * R * (L - C + 1) * (1 - p_gap); the paper fixes only the
// proportionality to (1 - p_gap), the rest of the functional form is this
// model's choice. For all p_gap above the returned threshold, compression is
// strictly cheaper.
inline CompressionAdvantage compression_advantage_threshold(const CostParams& p) {
    p.validate();
    CompressionAdvantage out;
    out.offline_saving = (p.c_a - p.c_c) * Rational(costdetail::compressed_nodes(p.B, p.L, p.C));
    out.surcharge_slope =
        Rational(p.Q) * p.c_a * p.N_bar * Rational(p.R) * Rational(p.L - p.C + 1);
    out.exists = out.offline_saving > Rational(0);
    if (!out.exists || out.surcharge_slope == Rational(0)) {
        out.p0 = 0;
        return out;
    }
    Rational raw = Rational(1) - out.offline_saving / out.surcharge_slope;
    out.p0 = raw < Rational(0) ? Rational(0) : raw;
    return out;
}

struct HierarchicalAdvantage {
    Rational q0;
    bool exists = false;
};

// Hierarchical summarization vs flat leaf-level summarization: finite Q_0
// beyond which the hierarchy wins.
inline HierarchicalAdvantage hierarchical_advantage_threshold(const CostParams& p) {
    Threshold t = crossover_threshold(hcag_cost(p), leaf_only_cost(p));
    HierarchicalAdvantage out;
    out.exists = t.exists;
    if (t.exists) out.q0 = t.q_star < Rational(0) ? Rational(0) : t.q_star;
    return out;
}

// ---------------------------------------------------------------------------
// Monte-Carlo traversal simulator

struct SimulationReport {
    Rational counted_cost;  // total across all trials
    std::int64_t judge_events = 0;
    std::int64_t detail_events = 0;      // offline detailed summaries
    std::int64_t compress_events = 0;    // offline placeholders
    std::int64_t expansion_events = 0;   // on-demand expansions (realized K)
    double mean_path_length = 0.0;
    std::int64_t trials = 0;
    Rational mean_cost_per_trial;
    double stderr_cost = 0.0;
    double mean_expansions_per_trial = 0.0;
    double stderr_expansions = 0.0;
};

// Builds a perfect (B, L) tree implicitly (path-prefix arithmetic) and
// charges events per the depth rule. Default mode re-expands per query,
// matching the per-query expansion term of the analytic cost exactly; with
// persistent_expansion, expansions survive across queries and each query
// independently skips traversal with probability p_gap (the sparsity study).
inline SimulationReport simulate_traversal(const CostParams& p, std::int64_t trials,
                                           std::uint64_t seed, bool persistent_expansion = false) {
    p.validate();
    if (trials < 1) throw Error("trials must be >= 1");

    std::int64_t leaves = checked_ipow(p.B, p.L - 1);
    std::int64_t offline_detail = costdetail::detailed_nodes(p.B, p.L, p.C);
    std::int64_t offline_compress = costdetail::compressed_nodes(p.B, p.L, p.C);

    // Global node ids: offset of level l plus the path prefix index.
    std::vector<std::int64_t> level_offset(static_cast<std::size_t>(p.L) + 2, 0);
    std::vector<std::int64_t> suffix_pow(static_cast<std::size_t>(p.L) + 2, 1);
    for (std::int64_t l = 1; l <= p.L; ++l) {
        level_offset[static_cast<std::size_t>(l) + 1] =
            level_offset[static_cast<std::size_t>(l)] + checked_ipow(p.B, l - 1);
        suffix_pow[static_cast<std::size_t>(l)] = checked_ipow(p.B, p.L - l);
    }

    SimulationReport rep;
    rep.trials = trials;
    double sum = 0.0, sum_sq = 0.0;
    double exp_sum = 0.0, exp_sum_sq = 0.0;
    std::int64_t total_paths = 0;
    double p_gap = p.p_gap.to_double();

    for (std::int64_t t = 0; t < trials; ++t) {
        std::mt19937_64 rng(seed + static_cast<std::uint64_t>(t));
        std::uniform_int_distribution<std::int64_t> pick_leaf(0, leaves - 1);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::unordered_set<std::int64_t> expanded;

        std::int64_t judge_t = 0, exp_t = 0;
        for (std::int64_t q = 0; q < p.Q; ++q) {
            if (persistent_expansion && unit(rng) < p_gap) continue;  // sparse query, skipped
            for (std::int64_t r = 0; r < p.R; ++r) {
                std::int64_t leaf = pick_leaf(rng);
                judge_t += p.L;
                ++total_paths;
                if (persistent_expansion) {
                    for (std::int64_t l = p.C; l <= p.L; ++l) {
                        std::int64_t id = level_offset[static_cast<std::size_t>(l)] +
                                          leaf / suffix_pow[static_cast<std::size_t>(l)];
                        if (expanded.insert(id).second) ++exp_t;
                    }
                } else {
                    exp_t += p.L - p.C + 1;  // per-query expansion along the path suffix
                }
            }
        }

        Rational trial_cost = p.c_a * Rational(offline_detail + exp_t) +
                              p.c_c * Rational(offline_compress) + p.c_j * Rational(judge_t);
        rep.counted_cost += trial_cost;
        rep.judge_events += judge_t;
        rep.detail_events += offline_detail;
        rep.compress_events += offline_compress;
        rep.expansion_events += exp_t;
        double cost_d = trial_cost.to_double();
        sum += cost_d;
        sum_sq += cost_d * cost_d;
        exp_sum += static_cast<double>(exp_t);
        exp_sum_sq += static_cast<double>(exp_t) * static_cast<double>(exp_t);
    }

    rep.mean_cost_per_trial = rep.counted_cost / Rational(trials);
    rep.mean_path_length = total_paths == 0 ? 0.0 : static_cast<double>(p.L);
    rep.mean_expansions_per_trial = exp_sum / static_cast<double>(trials);
    if (trials > 1) {
        auto stderr_of = [&](double s, double sq) {
            double mean = s / static_cast<double>(trials);
            double var =
                (sq - static_cast<double>(trials) * mean * mean) / static_cast<double>(trials - 1);
            return var <= 0.0 ? 0.0 : std::sqrt(var / static_cast<double>(trials));
        };
        rep.stderr_cost = stderr_of(sum, sum_sq);
        rep.stderr_expansions = stderr_of(exp_sum, exp_sum_sq);
    }
    return rep;
}

}  // namespace hcag
