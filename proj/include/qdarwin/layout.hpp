// layout.hpp — SubsystemLayout: ordered local dimensions (system first) and the
// index arithmetic shared by embeddings, partial traces, and state vectors.

#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace qdarwin {

struct DimCapError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

class SubsystemLayout {
public:
    static constexpr std::int64_t kDefaultDimCap = std::int64_t{1} << 14;

    SubsystemLayout() = default;

    explicit SubsystemLayout(std::vector<int> dims,
                             std::int64_t dim_cap = kDefaultDimCap)
        : dims_(std::move(dims)), dim_cap_(dim_cap) {
        if (dims_.empty()) {
            throw std::invalid_argument("SubsystemLayout: empty dimension list");
        }
        std::int64_t joint = 1;
        for (int d : dims_) {
            if (d < 2) {
                throw std::invalid_argument(
                    "SubsystemLayout: local dimensions must be >= 2");
            }
            joint *= d;
            if (joint > dim_cap_) {
                throw DimCapError("SubsystemLayout: joint dimension exceeds cap");
            }
        }
        joint_ = joint;
        strides_.assign(dims_.size(), 1);
        for (int s = static_cast<int>(dims_.size()) - 2; s >= 0; --s) {
            strides_[s] = strides_[s + 1] * dims_[s + 1];
        }
    }

    // Convenience: system of dimension sys_dim plus n_env equal env sites.
    static SubsystemLayout system_plus_env(int sys_dim, int n_env, int env_dim = 2,
                                           std::int64_t dim_cap = kDefaultDimCap) {
        std::vector<int> dims(1 + static_cast<std::size_t>(n_env), env_dim);
        dims[0] = sys_dim;
        return SubsystemLayout(std::move(dims), dim_cap);
    }

    int num_sites() const { return static_cast<int>(dims_.size()); }
    int num_env_sites() const { return num_sites() - 1; }
    int dim(int site) const { return dims_.at(static_cast<std::size_t>(site)); }
    int system_dim() const { return dims_[0]; }
    std::int64_t joint_dim() const { return joint_; }
    std::int64_t dim_cap() const { return dim_cap_; }
    const std::vector<int>& dims() const { return dims_; }

    // Stride of a site: the joint index advances by stride(s) when the local
    // index at s advances by one (site 0 is most significant).
    std::int64_t stride(int site) const {
        return strides_.at(static_cast<std::size_t>(site));
    }

    std::int64_t local_index(std::int64_t joint_index, int site) const {
        return (joint_index / stride(site)) % dims_[static_cast<std::size_t>(site)];
    }

    // Joint dimension of a subset of sites.
    std::int64_t subset_dim(const std::vector<int>& sites) const {
        std::int64_t d = 1;
        for (int s : sites) d *= dim(s);
        return d;
    }

    bool valid_env_site(int site) const { return site >= 1 && site < num_sites(); }

    bool operator==(const SubsystemLayout& o) const { return dims_ == o.dims_; }

private:
    std::vector<int> dims_;
    std::vector<std::int64_t> strides_;
    std::int64_t joint_ = 0;
    std::int64_t dim_cap_ = kDefaultDimCap;
};

}  // namespace qdarwin
