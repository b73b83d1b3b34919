#pragma once
// Data-parallel inner loops shared by the spectral, estimator and SVM code.
//
// Every kernel has a scalar reference implementation and, on x86-64 builds,
// an AVX2+FMA variant. The variant is picked once at startup from CPUID and
// can be pinned with PULSEGATE_SIMD=scalar|avx2. Variants differ only in
// floating-point summation order.

#include <complex>
#include <cstddef>
#include <span>
#include <string_view>

namespace pulsegate::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view isa_name(Isa isa);
bool isa_available(Isa isa);
Isa active_isa();

/// Switches the process-wide kernel table. Throws if the ISA is unavailable.
void set_isa(Isa isa);

double dot(std::span<const double> a, std::span<const double> b);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double squared_distance(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> x);
double sum_squares(std::span<const double> x);
/// out[i] = |z[i]|^2
void power(std::span<const std::complex<double>> z, std::span<double> out);

// Raw per-ISA entry points, exposed for equivalence tests.
struct Table {
    double (*dot)(const double*, const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    double (*squared_distance)(const double*, const double*, std::size_t);
    double (*sum)(const double*, std::size_t);
    double (*sum_squares)(const double*, std::size_t);
    void (*power)(const double*, double*, std::size_t);  // interleaved re/im in
};

const Table& table_for(Isa isa);

namespace scalar {
extern const Table table;
}
#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
extern const Table table;
bool compiled();
}
#endif

}  // namespace pulsegate::kernels
