#include "pulsegate/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

#include "pulsegate/error.hpp"

namespace pulsegate::kernels {

#if !defined(PULSEGATE_HAVE_AVX2) && (defined(__x86_64__) || defined(_M_X64))
namespace avx2 {
const Table table = scalar::table;
bool compiled() { return false; }
}  // namespace avx2
#endif

namespace {

bool cpu_has_avx2() {
#if defined(PULSEGATE_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa detect() {
    if (const char* env = std::getenv("PULSEGATE_SIMD")) {
        const std::string choice(env);
        if (choice == "scalar") return Isa::Scalar;
        if (choice == "avx2" && cpu_has_avx2()) return Isa::Avx2;
    }
    return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

struct State {
    std::atomic<Isa> isa{detect()};
};

State& state() {
    static State s;
    return s;
}

const Table& active() { return table_for(state().isa.load(std::memory_order_relaxed)); }

void check_same_size(std::size_t a, std::size_t b) {
    if (a != b) fail(ErrorKind::InvalidArgument, "kernel operands differ in length");
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) { return isa == Isa::Scalar || cpu_has_avx2(); }

Isa active_isa() { return state().isa.load(std::memory_order_relaxed); }

void set_isa(Isa isa) {
    if (!isa_available(isa)) fail(ErrorKind::InvalidArgument, "requested SIMD variant is not available");
    state().isa.store(isa, std::memory_order_relaxed);
}

const Table& table_for(Isa isa) {
#if defined(PULSEGATE_HAVE_AVX2)
    if (isa == Isa::Avx2) return avx2::table;
#else
    (void)isa;
#endif
    return scalar::table;
}

double dot(std::span<const double> a, std::span<const double> b) {
    check_same_size(a.size(), b.size());
    return active().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    check_same_size(x.size(), y.size());
    active().axpy(alpha, x.data(), y.data(), x.size());
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    check_same_size(a.size(), b.size());
    return active().squared_distance(a.data(), b.data(), a.size());
}

double sum(std::span<const double> x) { return active().sum(x.data(), x.size()); }

double sum_squares(std::span<const double> x) { return active().sum_squares(x.data(), x.size()); }

void power(std::span<const std::complex<double>> z, std::span<double> out) {
    check_same_size(z.size(), out.size());
    active().power(reinterpret_cast<const double*>(z.data()), out.data(), z.size());
}

}  // namespace pulsegate::kernels
