// information.hpp — Reduced density matrices by direct index contraction,
// von Neumann entropy, system-fragment mutual information, fragment
// enumeration/sampling, MI profiles, and plateau metrics.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qdarwin/linalg.hpp"
#include "qdarwin/rng.hpp"
#include "qdarwin/state.hpp"

namespace qdarwin {

// --------------------------- fragments --------------------------------------

// A subset of environment sites (indices >= 1). Empty fragments are allowed
// and carry zero mutual information.
struct Fragment {
    std::vector<int> sites;  // sorted, unique

    Fragment() = default;

    explicit Fragment(std::vector<int> s) : sites(std::move(s)) {
        std::sort(sites.begin(), sites.end());
        if (std::adjacent_find(sites.begin(), sites.end()) != sites.end()) {
            throw std::invalid_argument("Fragment: repeated site");
        }
        if (!sites.empty() && sites.front() < 1) {
            throw std::invalid_argument("Fragment: environment sites start at 1");
        }
    }

    std::size_t size() const { return sites.size(); }
};

// --------------------------- partial trace ----------------------------------

// Reduced density matrix over `keep` (sorted site indices), contracted
// directly from the amplitudes; the full joint density matrix is never formed.
inline Matrix partial_trace(const StateVector& psi, const std::vector<int>& keep) {
    const SubsystemLayout& lay = psi.layout;
    for (int s : keep) {
        if (s < 0 || s >= lay.num_sites()) {
            throw std::out_of_range("partial_trace: invalid site index");
        }
    }
    if (!std::is_sorted(keep.begin(), keep.end()) ||
        std::adjacent_find(keep.begin(), keep.end()) != keep.end()) {
        throw std::invalid_argument("partial_trace: keep set must be sorted and unique");
    }

    const int n = lay.num_sites();
    const std::int64_t d_keep = lay.subset_dim(keep);
    const std::int64_t d_rest = lay.joint_dim() / d_keep;

    // Per-site strides within the (keep, rest) factor spaces.
    std::vector<std::int64_t> wk(static_cast<std::size_t>(n), 0);
    std::vector<std::int64_t> wr(static_cast<std::size_t>(n), 0);
    {
        std::int64_t sk = 1, sr = 1;
        for (int s = n - 1; s >= 0; --s) {
            const bool kept = std::binary_search(keep.begin(), keep.end(), s);
            if (kept) {
                wk[static_cast<std::size_t>(s)] = sk;
                sk *= lay.dim(s);
            } else {
                wr[static_cast<std::size_t>(s)] = sr;
                sr *= lay.dim(s);
            }
        }
    }

    // Odometer walk over joint indices, maintaining both factor indices.
    Matrix m = Matrix::Zero(d_keep, d_rest);
    std::vector<int> digit(static_cast<std::size_t>(n), 0);
    std::int64_t ik = 0, ir = 0;
    const std::int64_t joint = lay.joint_dim();
    for (std::int64_t i = 0;;) {
        m(ik, ir) = psi.amplitudes(i);
        if (++i == joint) break;
        for (int s = n - 1;; --s) {
            const auto su = static_cast<std::size_t>(s);
            if (++digit[su] < lay.dim(s)) {
                ik += wk[su];
                ir += wr[su];
                break;
            }
            digit[su] = 0;
            ik -= wk[su] * (lay.dim(s) - 1);
            ir -= wr[su] * (lay.dim(s) - 1);
        }
    }

    Matrix rho(d_keep, d_keep);
    rho.noalias() = m * m.adjoint();
    return rho;
}

// --------------------------- entropy ----------------------------------------

// von Neumann entropy in bits. Eigenvalues are clipped to [0, 1] before the
// logarithm; negatives of order -1e-15 occur in practice.
inline double entropy(const Matrix& rho) {
    if (std::abs(rho.trace().real() - 1.0) > 1e-8 ||
        std::abs(rho.trace().imag()) > 1e-8) {
        throw std::invalid_argument("entropy: trace deviates from 1");
    }
    const Eigen::VectorXd evals = hermitian_eigvals(rho);
    double s = 0.0;
    for (Eigen::Index i = 0; i < evals.size(); ++i) {
        const double lam = std::clamp(evals(i), 0.0, 1.0);
        if (lam > 0.0) s -= lam * std::log2(lam);
    }
    return s;
}

namespace detail {

// Entropy of the reduced state on `keep`, computed on whichever side of the
// pure-state bipartition is smaller (S(keep) == S(complement) for pure psi).
inline double entropy_of_keep(const StateVector& psi, std::vector<int> keep) {
    const SubsystemLayout& lay = psi.layout;
    std::sort(keep.begin(), keep.end());
    const std::int64_t d_keep = lay.subset_dim(keep);
    if (d_keep * d_keep > lay.joint_dim()) {
        std::vector<int> comp;
        for (int s = 0; s < lay.num_sites(); ++s) {
            if (!std::binary_search(keep.begin(), keep.end(), s)) comp.push_back(s);
        }
        keep = std::move(comp);
    }
    if (keep.empty()) return 0.0;
    return entropy(partial_trace(psi, keep));
}

}  // namespace detail

// --------------------------- mutual information -----------------------------

// I(S:F) = S(rho_S) + S(rho_F) - S(rho_SF), in bits.
inline double mutual_information(const StateVector& psi, const Fragment& fragment) {
    for (int s : fragment.sites) {
        if (!psi.layout.valid_env_site(s)) {
            throw std::out_of_range("mutual_information: invalid fragment site");
        }
    }
    if (fragment.sites.empty()) return 0.0;
    const double s_sys = detail::entropy_of_keep(psi, {0});
    const double s_frag = detail::entropy_of_keep(psi, fragment.sites);
    std::vector<int> joint = fragment.sites;
    joint.insert(joint.begin(), 0);
    const double s_joint = detail::entropy_of_keep(psi, joint);
    return s_sys + s_frag - s_joint;
}

// --------------------------- fragment sampling ------------------------------

struct FragmentSampler {
    enum class Kind { exhaustive, random };
    Kind kind = Kind::exhaustive;
    int samples = 0;          // random only
    std::uint64_t seed = 0;   // random only

    static FragmentSampler exhaustive() { return {}; }
    static FragmentSampler random(int k, std::uint64_t seed) {
        return {Kind::random, k, seed};
    }

    // Default policy: exhaustive when C(n, size) <= cap, else cap samples.
    static FragmentSampler auto_policy(std::uint64_t n_choose_k, std::uint64_t seed,
                                       int cap = 256) {
        if (n_choose_k <= static_cast<std::uint64_t>(cap)) return exhaustive();
        return random(cap, seed);
    }
};

inline std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t c = 1;
    for (int i = 1; i <= k; ++i) {
        c = c * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    }
    return c;
}

namespace detail {

// Combination of `size` elements from [0, n) with the given lexicographic rank.
inline std::vector<int> unrank_combination(int n, int size, std::uint64_t rank) {
    std::vector<int> out;
    int x = 0;
    for (int i = 0; i < size; ++i) {
        while (binomial(n - 1 - x, size - 1 - i) <= rank) {
            rank -= binomial(n - 1 - x, size - 1 - i);
            ++x;
        }
        out.push_back(x);
        ++x;
    }
    return out;
}

}  // namespace detail

// All (exhaustive) or k distinct random fragments of a given size drawn from
// `universe` (a sorted list of environment site indices).
inline std::vector<Fragment> enumerate_fragments(const std::vector<int>& universe,
                                                 int size,
                                                 const FragmentSampler& sampler) {
    const int n = static_cast<int>(universe.size());
    if (size < 0 || size > n) {
        throw std::invalid_argument("enumerate_fragments: size out of range");
    }
    std::vector<Fragment> out;
    if (size == 0) {
        out.emplace_back();
        return out;
    }
    const std::uint64_t total = binomial(n, size);
    if (sampler.kind == FragmentSampler::Kind::exhaustive) {
        std::vector<int> pick(static_cast<std::size_t>(size));
        for (int i = 0; i < size; ++i) pick[static_cast<std::size_t>(i)] = i;
        while (true) {
            std::vector<int> sites;
            for (int p : pick) sites.push_back(universe[static_cast<std::size_t>(p)]);
            out.emplace_back(std::move(sites));
            int i = size - 1;
            while (i >= 0 && pick[static_cast<std::size_t>(i)] == n - size + i) --i;
            if (i < 0) break;
            ++pick[static_cast<std::size_t>(i)];
            for (int j = i + 1; j < size; ++j) {
                pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
            }
        }
        return out;
    }

    if (static_cast<std::uint64_t>(sampler.samples) > total) {
        throw std::invalid_argument(
            "enumerate_fragments: sample count exceeds number of fragments");
    }
    Prng rng = Prng::stream(sampler.seed, "fragments",
                            static_cast<std::uint64_t>(size),
                            static_cast<std::uint64_t>(n));
    std::set<std::uint64_t> ranks;
    while (ranks.size() < static_cast<std::size_t>(sampler.samples)) {
        ranks.insert(rng.below(total));
    }
    for (std::uint64_t r : ranks) {
        std::vector<int> sites;
        for (int p : detail::unrank_combination(n, size, r)) {
            sites.push_back(universe[static_cast<std::size_t>(p)]);
        }
        out.emplace_back(std::move(sites));
    }
    return out;
}

// Mean and standard error of I(S:F) over fragments of one size.
inline std::pair<double, double> mi_by_size(const StateVector& psi, int size,
                                            const FragmentSampler& sampler,
                                            const std::vector<int>* universe = nullptr) {
    std::vector<int> all;
    if (universe) {
        all = *universe;
    } else {
        for (int s = 1; s < psi.layout.num_sites(); ++s) all.push_back(s);
    }
    const auto frags = enumerate_fragments(all, size, sampler);
    std::vector<double> vals;
    vals.reserve(frags.size());
    for (const auto& f : frags) vals.push_back(mutual_information(psi, f));
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    double stderr_ = vals.size() > 1
        ? std::sqrt(var / static_cast<double>(vals.size() - 1)) /
              std::sqrt(static_cast<double>(vals.size()))
        : 0.0;
    return {mean, stderr_};
}

// --------------------------- MI profiles ------------------------------------

struct MICell {
    bool present = false;
    double mean_raw = 0.0;     // bits
    double mean_norm = 0.0;    // divided by S(rho_S), per trial
    double stderr_norm = 0.0;  // across trials
};

struct MIProfile {
    std::vector<double> times;
    std::vector<int> sizes;  // fragment sizes carried by this profile
    int env_size = 0;        // total environment sites in the layout
    int trials = 0;
    std::string normalization = "by_system_entropy";
    std::vector<std::vector<MICell>> cells;  // [time][size position]

    const MICell* cell(std::size_t time_index, int size) const {
        auto it = std::find(sizes.begin(), sizes.end(), size);
        if (it == sizes.end()) return nullptr;
        const auto& c = cells[time_index][static_cast<std::size_t>(it - sizes.begin())];
        return c.present ? &c : nullptr;
    }

    std::size_t time_index(double t) const {
        for (std::size_t i = 0; i < times.size(); ++i) {
            if (std::abs(times[i] - t) <= 1e-9 * std::max(1.0, std::abs(t))) return i;
        }
        throw std::invalid_argument("MIProfile: time not in profile");
    }
};

// Fraction of fragment sizes f in [1, N-1] whose mean normalized MI sits
// within epsilon of 1 at time t. N is the full environment size; sizes absent
// from the profile at t (e.g. not-yet-opened collision units) count as
// outside the plateau.
inline double plateau_score(const MIProfile& profile, double t, double epsilon) {
    const std::size_t ti = profile.time_index(t);
    const int n = profile.env_size;
    if (n <= 1) return 0.0;
    int hits = 0;
    for (int f = 1; f <= n - 1; ++f) {
        const MICell* c = profile.cell(ti, f);
        if (c && std::abs(c->mean_norm - 1.0) <= epsilon) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(n - 1);
}

// R^2 of the least-squares line through (x, y); 1.0 for degenerate flat data.
inline double linear_r2(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    if (n != ys.size() || n < 2) {
        throw std::invalid_argument("linear_r2: need >= 2 points");
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    if (syy < 1e-20) return 1.0;
    const double slope = sxy / sxx;
    const double ss_res = syy - slope * sxy;
    return 1.0 - ss_res / syy;
}

}  // namespace qdarwin
