#pragma once

// Dense rank-2/rank-4 real tensors with fixed row-major layout, a small
// einsum-style pairwise contraction utility, and allocation instrumentation
// used by the memory-ceiling tests.

#include <algorithm>
#include <array>
#include <atomic>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace acse {

// ---------------------------------------------------------------------------
// allocation accounting (doubles currently alive in tensor buffers, and peak)

namespace alloc_stats {

inline std::atomic<std::int64_t>& live() {
    static std::atomic<std::int64_t> v{0};
    return v;
}
inline std::atomic<std::int64_t>& peak() {
    static std::atomic<std::int64_t> v{0};
    return v;
}
inline void add(std::int64_t n) {
    const std::int64_t now = live().fetch_add(n) + n;
    std::int64_t p = peak().load();
    while (now > p && !peak().compare_exchange_weak(p, now)) {
    }
}
inline void sub(std::int64_t n) { live().fetch_sub(n); }
inline void reset_peak() { peak().store(live().load()); }

}  // namespace alloc_stats

namespace detail {

class Buffer {
  public:
    Buffer() = default;
    explicit Buffer(std::size_t n) : v_(n, 0.0) { alloc_stats::add(static_cast<std::int64_t>(n)); }
    Buffer(const Buffer& o) : v_(o.v_) { alloc_stats::add(static_cast<std::int64_t>(v_.size())); }
    Buffer(Buffer&& o) noexcept : v_(std::move(o.v_)) { o.v_.clear(); }
    Buffer& operator=(const Buffer& o) {
        if (this != &o) {
            alloc_stats::sub(static_cast<std::int64_t>(v_.size()));
            v_ = o.v_;
            alloc_stats::add(static_cast<std::int64_t>(v_.size()));
        }
        return *this;
    }
    Buffer& operator=(Buffer&& o) noexcept {
        if (this != &o) {
            alloc_stats::sub(static_cast<std::int64_t>(v_.size()));
            v_ = std::move(o.v_);
            o.v_.clear();
        }
        return *this;
    }
    ~Buffer() { alloc_stats::sub(static_cast<std::int64_t>(v_.size())); }

    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }
    std::size_t size() const { return v_.size(); }

  private:
    std::vector<double> v_;
};

}  // namespace detail

// ---------------------------------------------------------------------------
// parallel_for: static partition over independent output ranges. Each index is
// processed by exactly one thread with its own sequential summation order, so
// results are bitwise independent of the thread count. ACSE_THREADS caps the
// worker count (0 or unset = hardware concurrency).

inline unsigned thread_cap() {
    static const unsigned cap = [] {
        unsigned hw = std::thread::hardware_concurrency();
        if (hw == 0) hw = 1;
        const char* e = std::getenv("ACSE_THREADS");
        if (!e || *e == '\0') return hw;
        long v = std::strtol(e, nullptr, 10);
        if (v <= 0) return hw;
        return std::min<unsigned>(hw, static_cast<unsigned>(v));
    }();
    return cap;
}

template <typename F>
inline void parallel_for(std::size_t n, F&& fn) {
    const unsigned nt = std::min<std::size_t>(thread_cap(), n ? n : 1);
    if (nt <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(nt);
    for (unsigned t = 0; t < nt; ++t) {
        const std::size_t lo = n * t / nt, hi = n * (t + 1) / nt;
        workers.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& w : workers) w.join();
}

// ---------------------------------------------------------------------------

class Mat {
  public:
    Mat() = default;
    Mat(std::size_t rows, std::size_t cols) : r_(rows), c_(cols), buf_(rows * cols) {}
    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return r_; }
    std::size_t cols() const { return c_; }
    double& operator()(std::size_t i, std::size_t j) { return buf_.data()[i * c_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return buf_.data()[i * c_ + j]; }
    double* data() { return buf_.data(); }
    const double* data() const { return buf_.data(); }
    std::size_t size() const { return buf_.size(); }

    Mat transposed() const {
        Mat t(c_, r_);
        for (std::size_t i = 0; i < r_; ++i)
            for (std::size_t j = 0; j < c_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }
    double trace() const {
        double s = 0.0;
        for (std::size_t i = 0; i < std::min(r_, c_); ++i) s += (*this)(i, i);
        return s;
    }
    double max_abs() const {
        double m = 0.0;
        for (std::size_t i = 0; i < size(); ++i) m = std::max(m, std::abs(data()[i]));
        return m;
    }

  private:
    std::size_t r_ = 0, c_ = 0;
    detail::Buffer buf_;
};

class Tensor4 {
  public:
    Tensor4() = default;
    explicit Tensor4(std::size_t n) : Tensor4(n, n, n, n) {}
    Tensor4(std::size_t n0, std::size_t n1, std::size_t n2, std::size_t n3)
        : n_{n0, n1, n2, n3}, buf_(n0 * n1 * n2 * n3) {}

    std::size_t dim(int a) const { return n_[static_cast<std::size_t>(a)]; }
    const std::array<std::size_t, 4>& dims() const { return n_; }
    std::size_t size() const { return buf_.size(); }

    double& operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) {
        return buf_.data()[((i * n_[1] + j) * n_[2] + k) * n_[3] + l];
    }
    double operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const {
        return buf_.data()[((i * n_[1] + j) * n_[2] + k) * n_[3] + l];
    }
    double* data() { return buf_.data(); }
    const double* data() const { return buf_.data(); }

    Tensor4& operator+=(const Tensor4& o) {
        assert(size() == o.size());
        for (std::size_t i = 0; i < size(); ++i) data()[i] += o.data()[i];
        return *this;
    }
    Tensor4& operator-=(const Tensor4& o) {
        assert(size() == o.size());
        for (std::size_t i = 0; i < size(); ++i) data()[i] -= o.data()[i];
        return *this;
    }
    Tensor4& operator*=(double s) {
        for (std::size_t i = 0; i < size(); ++i) data()[i] *= s;
        return *this;
    }
    double max_abs() const {
        double m = 0.0;
        for (std::size_t i = 0; i < size(); ++i) m = std::max(m, std::abs(data()[i]));
        return m;
    }
    double sum_sq() const {
        double s = 0.0;
        for (std::size_t i = 0; i < size(); ++i) s += data()[i] * data()[i];
        return s;
    }

  private:
    std::array<std::size_t, 4> n_{0, 0, 0, 0};
    detail::Buffer buf_;
};

inline Tensor4 operator+(Tensor4 a, const Tensor4& b) { return a += b; }
inline Tensor4 operator-(Tensor4 a, const Tensor4& b) { return a -= b; }
inline Tensor4 operator*(double s, Tensor4 a) { return a *= s; }

// Axis a of the result reads source axis p[a]; source index position p[a]
// is filled with the result's a-th index. Example: p = {1,0,2,3} transposes
// the first two axes; p = {2,3,1,0} gives out[i,j,k,l] = src[l,k,i,j].
inline Tensor4 permute4(const Tensor4& src, const std::array<int, 4>& p) {
    Tensor4 out(src.dim(p[0]), src.dim(p[1]), src.dim(p[2]), src.dim(p[3]));
    std::array<std::size_t, 4> x{};
    for (x[0] = 0; x[0] < out.dim(0); ++x[0])
        for (x[1] = 0; x[1] < out.dim(1); ++x[1])
            for (x[2] = 0; x[2] < out.dim(2); ++x[2])
                for (x[3] = 0; x[3] < out.dim(3); ++x[3]) {
                    std::array<std::size_t, 4> s{};
                    for (int a = 0; a < 4; ++a) s[static_cast<std::size_t>(p[a])] = x[static_cast<std::size_t>(a)];
                    out(x[0], x[1], x[2], x[3]) = src(s[0], s[1], s[2], s[3]);
                }
    return out;
}

// ---------------------------------------------------------------------------
// einsum-style pairwise contraction with a fixed evaluation schedule:
// both operands are permuted to [free..., contracted...] layout, multiplied as
// out[fa, fb] = sum_c A[fa, c] * B[fb, c] with a sequential c loop, and the
// result is permuted to the requested output order. Letters shared between the
// two input specs are contracted; every output letter must appear in exactly
// one input. Supports rank 2 and 4 operands/results ("ij", "ijkl" specs) plus
// pure outer products (no shared letters).

namespace detail {

struct NdView {
    const double* data;
    std::vector<std::size_t> dims;
    std::string spec;
};

inline std::vector<double> permute_nd(const NdView& in, const std::string& out_spec) {
    const std::size_t rank = in.spec.size();
    std::vector<int> src_axis(rank);
    std::vector<std::size_t> odims(rank);
    for (std::size_t a = 0; a < rank; ++a) {
        const auto pos = in.spec.find(out_spec[a]);
        if (pos == std::string::npos) throw std::logic_error("contract: bad permutation spec");
        src_axis[a] = static_cast<int>(pos);
        odims[a] = in.dims[pos];
    }
    std::vector<std::size_t> istr(rank, 1), ostr(rank, 1);
    for (std::size_t a = rank - 1; a > 0; --a) istr[a - 1] = istr[a] * in.dims[a];
    for (std::size_t a = rank - 1; a > 0; --a) ostr[a - 1] = ostr[a] * odims[a];
    std::size_t total = 1;
    for (auto d : odims) total *= d;
    std::vector<double> out(total);
    std::vector<std::size_t> x(rank, 0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t src = 0;
        for (std::size_t a = 0; a < rank; ++a) src += x[a] * istr[static_cast<std::size_t>(src_axis[a])];
        out[flat] = in.data[src];
        for (std::size_t a = rank; a-- > 0;) {
            if (++x[a] < odims[a]) break;
            x[a] = 0;
        }
    }
    return out;
}

// Core contraction over flat buffers. Returns data in sout order.
inline std::vector<double> contract_nd(const NdView& A, const NdView& B, const std::string& sout,
                                       std::vector<std::size_t>& out_dims) {
    std::string shared;
    for (char c : A.spec)
        if (B.spec.find(c) != std::string::npos) shared.push_back(c);
    std::sort(shared.begin(), shared.end());

    std::string freeA, freeB;
    for (char c : sout) {
        if (A.spec.find(c) != std::string::npos) {
            if (shared.find(c) != std::string::npos) throw std::logic_error("contract: output letter is contracted");
            freeA.push_back(c);
        } else if (B.spec.find(c) != std::string::npos) {
            freeB.push_back(c);
        } else {
            throw std::logic_error("contract: unknown output letter");
        }
    }
    if (freeA.size() + freeB.size() != sout.size() || sout.size() + 2 * shared.size() != A.spec.size() + B.spec.size())
        throw std::logic_error("contract: inconsistent specs");

    auto dim_of = [](const NdView& v, char c) {
        return v.dims[v.spec.find(c)];
    };
    for (char c : shared)
        if (dim_of(A, c) != dim_of(B, c)) throw std::logic_error("contract: contracted dims differ");

    const std::string layA = freeA + shared, layB = freeB + shared;
    const std::vector<double> a = permute_nd(A, layA);
    const std::vector<double> b = permute_nd(B, layB);

    std::size_t m = 1, n = 1, kk = 1;
    for (char c : freeA) m *= dim_of(A, c);
    for (char c : freeB) n *= dim_of(B, c);
    for (char c : shared) kk *= dim_of(A, c);

    std::vector<double> prod(m * n, 0.0);
    parallel_for(m, [&](std::size_t i) {
        const double* arow = a.data() + i * kk;
        double* orow = prod.data() + i * n;
        for (std::size_t j = 0; j < n; ++j) {
            const double* brow = b.data() + j * kk;
            double s = 0.0;
            for (std::size_t k = 0; k < kk; ++k) s += arow[k] * brow[k];
            orow[j] = s;
        }
    });

    // permute [freeA freeB] -> sout
    NdView pv;
    pv.data = prod.data();
    pv.spec = freeA + freeB;
    for (char c : freeA) pv.dims.push_back(dim_of(A, c));
    for (char c : freeB) pv.dims.push_back(dim_of(B, c));
    out_dims.clear();
    for (char c : sout) out_dims.push_back(A.spec.find(c) != std::string::npos ? dim_of(A, c) : dim_of(B, c));
    if (pv.spec == sout) return prod;
    return permute_nd(pv, sout);
}

inline NdView view_of(const Tensor4& t, std::string_view spec) {
    if (spec.size() != 4) throw std::logic_error("contract: rank-4 spec expected");
    return NdView{t.data(), {t.dim(0), t.dim(1), t.dim(2), t.dim(3)}, std::string(spec)};
}
inline NdView view_of(const Mat& m, std::string_view spec) {
    if (spec.size() != 2) throw std::logic_error("contract: rank-2 spec expected");
    return NdView{m.data(), {m.rows(), m.cols()}, std::string(spec)};
}

template <typename Out>
Out wrap_result(std::vector<double>&& flat, const std::vector<std::size_t>& dims);

template <>
inline Tensor4 wrap_result<Tensor4>(std::vector<double>&& flat, const std::vector<std::size_t>& dims) {
    if (dims.size() != 4) throw std::logic_error("contract: rank-4 result expected");
    Tensor4 t(dims[0], dims[1], dims[2], dims[3]);
    std::copy(flat.begin(), flat.end(), t.data());
    return t;
}
template <>
inline Mat wrap_result<Mat>(std::vector<double>&& flat, const std::vector<std::size_t>& dims) {
    if (dims.size() != 2) throw std::logic_error("contract: rank-2 result expected");
    Mat m(dims[0], dims[1]);
    std::copy(flat.begin(), flat.end(), m.data());
    return m;
}

}  // namespace detail

template <typename Out = Tensor4, typename TA, typename TB>
Out contract(const TA& A, std::string_view sa, const TB& B, std::string_view sb, std::string_view sout) {
    std::vector<std::size_t> dims;
    auto flat = detail::contract_nd(detail::view_of(A, sa), detail::view_of(B, sb), std::string(sout), dims);
    return detail::wrap_result<Out>(std::move(flat), dims);
}

}  // namespace acse
