#include "pulsegate/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <tuple>

#include "pulsegate/error.hpp"

namespace pulsegate::fft {
namespace {

enum class Kind { R2C, C2R, Forward, Backward };

class PlanCache {
public:
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    fftw_plan get(Kind kind, std::size_t n) {
        std::lock_guard lock(mutex_);
        const auto key = std::make_tuple(kind, n);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;

        const int len = static_cast<int>(n);
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        double* real = fftw_alloc_real(n + 2);
        fftw_complex* cplx = fftw_alloc_complex(n + 1);
        fftw_plan plan = nullptr;
        switch (kind) {
            case Kind::R2C: plan = fftw_plan_dft_r2c_1d(len, real, cplx, flags); break;
            case Kind::C2R: plan = fftw_plan_dft_c2r_1d(len, cplx, real, flags); break;
            case Kind::Forward: plan = fftw_plan_dft_1d(len, cplx, cplx, FFTW_FORWARD, flags); break;
            case Kind::Backward: plan = fftw_plan_dft_1d(len, cplx, cplx, FFTW_BACKWARD, flags); break;
        }
        fftw_free(real);
        fftw_free(cplx);
        if (plan == nullptr) fail(ErrorKind::NumericalFailure, "FFTW could not create a plan");
        plans_.emplace(key, plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::tuple<Kind, std::size_t>, fftw_plan> plans_;
};

PlanCache& cache() {
    static PlanCache c;
    return c;
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

std::vector<Complex> rfft(std::span<const double> x, std::size_t nfft) {
    require(nfft >= 1, ErrorKind::InvalidArgument, "nfft must be positive");
    require(nfft >= x.size(), ErrorKind::InvalidArgument, "nfft shorter than the signal");
    std::vector<double> in(nfft, 0.0);
    std::copy(x.begin(), x.end(), in.begin());
    std::vector<Complex> out(nfft / 2 + 1);
    fftw_execute_dft_r2c(cache().get(Kind::R2C, nfft), in.data(), as_fftw(out.data()));
    return out;
}

std::vector<double> irfft_unnormalized(std::span<const Complex> half, std::size_t nfft) {
    require(half.size() == nfft / 2 + 1, ErrorKind::InvalidArgument, "half spectrum length mismatch");
    // c2r overwrites its input.
    std::vector<Complex> in(half.begin(), half.end());
    std::vector<double> out(nfft);
    fftw_execute_dft_c2r(cache().get(Kind::C2R, nfft), as_fftw(in.data()), out.data());
    return out;
}

std::vector<Complex> dft(std::span<const Complex> x, bool inverse) {
    require(!x.empty(), ErrorKind::InvalidArgument, "empty transform");
    std::vector<Complex> in(x.begin(), x.end());
    std::vector<Complex> out(x.size());
    fftw_execute_dft(cache().get(inverse ? Kind::Backward : Kind::Forward, x.size()), as_fftw(in.data()),
                     as_fftw(out.data()));
    return out;
}

}  // namespace pulsegate::fft
