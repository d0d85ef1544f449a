// mixing.hpp — Induced intra-environment mixing check: the Lie closure of the
// system operators entering the interaction, with each generated operator
// tagged by the environment sites its nested-commutator string touches.
// Mixing freedom requires every string touching two or more distinct sites to
// vanish.

#pragma once

#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "qdarwin/linalg.hpp"

namespace qdarwin {

// A system-space generator with the environment site it couples through.
// site -1 marks the free system Hamiltonian (no site attached).
struct TaggedGenerator {
    Matrix op;
    int site = -1;
    std::string label;
};

struct MixingWitness {
    std::string description;  // nested commutator as an operator sequence
    Matrix matrix;            // the raw (unnormalized) nested commutator
    double norm = 0.0;        // Hilbert-Schmidt norm of `matrix`
};

enum class MixingStatus { free, mixing, inconclusive };

struct MixingResult {
    MixingStatus status = MixingStatus::free;
    std::optional<MixingWitness> witness;   // set when status == mixing
    std::vector<int> noncommuting_sites;    // same-site non-commuting pairs seen

    bool mixing_free() const { return status == MixingStatus::free; }
};

namespace detail {

// Linear-independence tracker over complex matrices (as flat vectors).
class SpanTracker {
public:
    // Returns true (and extends the span) when m is independent of it.
    bool add_if_independent(const Matrix& m, double tol = 1e-10) {
        Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size());
        for (const auto& b : basis_) v -= b.dot(v) * b;
        const double res = v.norm();
        if (res <= tol) return false;
        basis_.push_back(v / res);
        return true;
    }

    std::size_t size() const { return basis_.size(); }

private:
    std::vector<Eigen::VectorXcd> basis_;
};

}  // namespace detail

// Closure of {S_jk} u {H_S} under commutators. Generators at distinct sample
// times enter as distinct elements; the verdict is independent of their order.
inline MixingResult mixing_closure(const std::vector<TaggedGenerator>& generators,
                                   std::size_t max_ops, double zero_tol = 1e-10) {
    MixingResult result;

    std::vector<int> sites;
    for (const auto& g : generators) {
        if (g.site >= 1 &&
            std::find(sites.begin(), sites.end(), g.site) == sites.end()) {
            sites.push_back(g.site);
        }
    }
    std::sort(sites.begin(), sites.end());

    struct Element {
        Matrix normalized;
        double scale;  // raw nested commutator = scale * normalized
        std::string desc;
    };

    // Per-site closures: seed with that site's generators, repeatedly bracket
    // with the same site's generators and the free Hamiltonian. Strings never
    // leave their site tag, so each closure is independent.
    std::vector<std::vector<Element>> closures;
    std::size_t total = 0;
    for (int site : sites) {
        std::vector<const TaggedGenerator*> seeds, appliers;
        for (const auto& g : generators) {
            if (g.site == site) {
                seeds.push_back(&g);
                appliers.push_back(&g);
            } else if (g.site == -1) {
                appliers.push_back(&g);
            }
        }

        detail::SpanTracker span;
        std::vector<Element> closure;
        std::deque<std::size_t> frontier;
        for (const auto* s : seeds) {
            const double nrm = hs_norm(s->op);
            if (nrm <= zero_tol) continue;
            if (span.add_if_independent(s->op / nrm)) {
                closure.push_back({s->op / nrm, nrm, s->label});
                frontier.push_back(closure.size() - 1);
            }
        }

        while (!frontier.empty()) {
            const std::size_t ei = frontier.front();
            frontier.pop_front();
            for (const auto* a : appliers) {
                const Matrix raw = closure[ei].scale * commutator(a->op, closure[ei].normalized);
                const double nrm = hs_norm(raw);
                if (nrm <= zero_tol * std::max(1.0, hs_norm(a->op) * closure[ei].scale)) {
                    continue;
                }
                if (a->site == site) {
                    // same-site non-commuting pair: allowed, but flagged
                    if (std::find(result.noncommuting_sites.begin(),
                                  result.noncommuting_sites.end(),
                                  site) == result.noncommuting_sites.end()) {
                        result.noncommuting_sites.push_back(site);
                    }
                }
                if (!span.add_if_independent(raw / nrm)) continue;
                closure.push_back(
                    {raw / nrm, nrm, "[" + a->label + ", " + closure[ei].desc + "]"});
                frontier.push_back(closure.size() - 1);
                if (++total > max_ops) {
                    result.status = MixingStatus::inconclusive;
                    return result;
                }
            }
        }
        closures.push_back(std::move(closure));
    }

    // Cross-site brackets: any generator of a different site applied to any
    // closure element must annihilate it.
    for (std::size_t si = 0; si < sites.size(); ++si) {
        for (const auto& elem : closures[si]) {
            for (const auto& g : generators) {
                if (g.site < 1 || g.site == sites[si]) continue;
                const Matrix raw = elem.scale * commutator(g.op, elem.normalized);
                const double nrm = hs_norm(raw);
                if (nrm > zero_tol * std::max(1.0, hs_norm(g.op) * elem.scale)) {
                    result.status = MixingStatus::mixing;
                    result.witness = MixingWitness{
                        "[" + g.label + ", " + elem.desc + "]", raw, nrm};
                    return result;
                }
            }
        }
    }
    return result;
}

}  // namespace qdarwin
