#pragma once

#include <map>
#include <mutex>
#include <utility>

#include <Eigen/Dense>
#include <fftw3.h>

#include "semiclass/common.hpp"

namespace semiclass::fft {

namespace detail {

// FFTW planning is not thread safe; execution on distinct buffers is.
// Plans are created once per (n, sign) with FFTW_UNALIGNED so they can be
// replayed on any caller-provided buffer.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(int n, int sign) {
        std::lock_guard<std::mutex> lock(mu_);
        auto key = std::make_pair(n, sign);
        auto it = plans_.find(key);
        if (it != plans_.end()) return it->second;
        std::vector<Complex> dummy_in(n), dummy_out(n);
        fftw_plan plan = fftw_plan_dft_1d(
            n, reinterpret_cast<fftw_complex*>(dummy_in.data()),
            reinterpret_cast<fftw_complex*>(dummy_out.data()),
            sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
            FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (!plan) throw std::runtime_error("fftw plan creation failed");
        plans_.emplace(key, plan);
        return plan;
    }

private:
    PlanCache() = default;
    std::mutex mu_;
    std::map<std::pair<int, int>, fftw_plan> plans_;
};

}  // namespace detail

/// Unnormalized discrete Fourier transform:
///   out[j] = sum_k in[k] * exp(sign * 2*pi*i * j*k / n),  sign in {-1, +1}.
inline Eigen::VectorXcd dft(const Eigen::VectorXcd& in, int sign) {
    const int n = static_cast<int>(in.size());
    Eigen::VectorXcd out(n);
    fftw_plan plan = detail::PlanCache::instance().get(n, sign);
    // fftw_execute_dft does not modify the input for out-of-place c2c plans.
    fftw_execute_dft(plan,
                     reinterpret_cast<fftw_complex*>(
                         const_cast<Complex*>(in.data())),
                     reinterpret_cast<fftw_complex*>(out.data()));
    return out;
}

}  // namespace semiclass::fft
