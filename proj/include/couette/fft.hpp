#pragma once

// Thin FFTW layer: cached in-place plans, a 2-D transform, batched 1-D line
// transforms and a chirp-z (Bluestein) evaluator of the discrete-time Fourier
// transform at arbitrary arithmetic progressions of frequencies.

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <map>
#include <mutex>
#include <numbers>
#include <span>
#include <tuple>
#include <vector>

namespace couette::fft {

using cplx = std::complex<double>;

namespace detail {

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  PlanCache(const PlanCache&) = delete;
  PlanCache& operator=(const PlanCache&) = delete;

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  // rank 2: n x n transform; rank 1: `howmany` contiguous lines of length n.
  fftw_plan get(int rank, int n, int howmany, int sign) {
    std::lock_guard lock(mu_);
    auto key = std::make_tuple(rank, n, howmany, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    const std::size_t total = static_cast<std::size_t>(n) * (rank == 2 ? n : howmany);
    auto* scratch = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * total));
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan plan = nullptr;
    if (rank == 2) {
      plan = fftw_plan_dft_2d(n, n, scratch, scratch, sign, flags);
    } else {
      int len = n;
      plan = fftw_plan_many_dft(1, &len, howmany, scratch, nullptr, 1, n, scratch, nullptr, 1, n,
                                sign, flags);
    }
    fftw_free(scratch);
    plans_.emplace(key, plan);
    return plan;
  }

 private:
  PlanCache() = default;
  std::mutex mu_;
  std::map<std::tuple<int, int, int, int>, fftw_plan> plans_;
};

inline fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace detail

/// Unnormalized in-place 2-D DFT of an n x n row-major array.
inline void transform_2d(std::span<cplx> data, int n, int sign) {
  fftw_plan plan = detail::PlanCache::instance().get(2, n, 1, sign);
  fftw_execute_dft(plan, detail::as_fftw(data.data()), detail::as_fftw(data.data()));
}

/// Unnormalized in-place DFT of `lines` contiguous rows of length n.
inline void transform_lines(std::span<cplx> data, int n, int lines, int sign) {
  fftw_plan plan = detail::PlanCache::instance().get(1, n, lines, sign);
  fftw_execute_dft(plan, detail::as_fftw(data.data()), detail::as_fftw(data.data()));
}

inline double wrap_phase(double phase) {
  return std::remainder(phase, 2.0 * std::numbers::pi);
}

inline cplx unit_phase(double phase) {
  const double p = wrap_phase(phase);
  return {std::cos(p), std::sin(p)};
}

/// Chirp-z evaluation of
///   out[l][k] = sum_j in[l][j] exp(-i (w0[l] + k dw) (x0 + j h)),  k = 0..n_out-1
/// for a batch of lines sharing dw, h and x0 but with per-line offsets w0.
class ChirpTransform {
 public:
  ChirpTransform(int n_in, int n_out, double dw, double h)
      : n_in_(n_in), n_out_(n_out), dw_(dw), h_(h) {
    size_ = 1;
    while (size_ < n_in + n_out - 1) size_ *= 2;
    const double alpha = dw * h;
    pre_.resize(n_in);
    for (int j = 0; j < n_in; ++j) pre_[j] = unit_phase(-0.5 * alpha * double(j) * double(j));
    post_.resize(n_out);
    for (int k = 0; k < n_out; ++k) post_[k] = unit_phase(-0.5 * alpha * double(k) * double(k));
    kernel_.assign(size_, cplx{});
    for (int m = -(n_in - 1); m <= n_out - 1; ++m) {
      const int idx = m >= 0 ? m : size_ + m;
      kernel_[idx] = unit_phase(0.5 * alpha * double(m) * double(m));
    }
    transform_lines(kernel_, size_, 1, FFTW_FORWARD);
    for (auto& c : kernel_) c /= double(size_);
  }

  int n_in() const { return n_in_; }
  int n_out() const { return n_out_; }

  void apply(std::span<const cplx> in, std::span<cplx> out, int lines, std::span<const double> w0,
             double x0) const {
    std::vector<cplx> work(static_cast<std::size_t>(size_) * lines, cplx{});
    for (int l = 0; l < lines; ++l) {
      const cplx* src = in.data() + static_cast<std::size_t>(l) * n_in_;
      cplx* dst = work.data() + static_cast<std::size_t>(l) * size_;
      const double step = -w0[l] * h_;
      for (int j = 0; j < n_in_; ++j) dst[j] = src[j] * pre_[j] * unit_phase(step * j);
    }
    transform_lines(work, size_, lines, FFTW_FORWARD);
    for (int l = 0; l < lines; ++l) {
      cplx* row = work.data() + static_cast<std::size_t>(l) * size_;
      for (int m = 0; m < size_; ++m) row[m] *= kernel_[m];
    }
    transform_lines(work, size_, lines, FFTW_BACKWARD);
    for (int l = 0; l < lines; ++l) {
      const cplx* row = work.data() + static_cast<std::size_t>(l) * size_;
      cplx* dst = out.data() + static_cast<std::size_t>(l) * n_out_;
      for (int k = 0; k < n_out_; ++k) {
        const double wk = w0[l] + k * dw_;
        dst[k] = row[k] * post_[k] * unit_phase(-wk * x0);
      }
    }
  }

 private:
  int n_in_;
  int n_out_;
  double dw_;
  double h_;
  int size_;
  std::vector<cplx> pre_;
  std::vector<cplx> post_;
  std::vector<cplx> kernel_;
};

}  // namespace couette::fft
