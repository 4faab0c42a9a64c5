// Benchmark comparing the OpenMP kernels against the serial reference, and
// checking that both produce bitwise-identical results on the same inputs.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "poseadapt/core/rng.hpp"
#include "poseadapt/core/tensor.hpp"
#include "poseadapt/kernels/kernels.hpp"
#include "poseadapt/kernels/reference.hpp"

using namespace poseadapt;

namespace {

double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

Tensor randn(std::vector<int> shape, Rng& rng) {
    Tensor t(std::move(shape));
    for (long i = 0; i < t.size(); ++i) t[i] = static_cast<real>(rng.normal());
    return t;
}

template <class F>
double time_best_ms(F&& f, int repeats) {
    double best = 1e30;
    for (int r = 0; r < repeats; ++r) {
        const double t0 = now_ms();
        f();
        const double t1 = now_ms();
        if (t1 - t0 < best) best = t1 - t0;
    }
    return best;
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
    return a.size() == b.size() &&
           std::memcmp(a.data(), b.data(), static_cast<size_t>(a.size()) * sizeof(real)) == 0;
}

struct Case {
    std::string name;
    double serial_ms, omp_ms;
    bool equal;
    double gflop;
};

}  // namespace

int main(int argc, char** argv) {
    // --quick shrinks the problem for use as a smoke test
    const bool quick = argc > 1 && std::string(argv[1]) == "--quick";
    const int B = quick ? 2 : 8;
    const int C = quick ? 8 : 32;
    const int OC = quick ? 16 : 64;
    const int H = quick ? 16 : 64;
    const int repeats = quick ? 2 : 5;

    Rng rng(7);
    std::vector<Case> cases;

    {
        Tensor in = randn({B, C, H, H}, rng);
        Tensor w = randn({OC, C, 3, 3}, rng);
        Tensor bias = randn({OC}, rng);
        const int OH = (H + 2 - 3) / 2 + 1;
        Tensor out_ref({B, OC, OH, OH}), out_omp({B, OC, OH, OH});
        const double ser = time_best_ms([&] {
            ref::conv2d_forward(in.data(), B, C, H, H, w.data(), OC, 3, 3, bias.data(), 2, 1, out_ref.data());
        }, repeats);
        const double omp = time_best_ms([&] {
            kern::conv2d_forward(in.data(), B, C, H, H, w.data(), OC, 3, 3, bias.data(), 2, 1, out_omp.data());
        }, repeats);
        const double flops = 2.0 * B * OC * OH * OH * C * 9;
        cases.push_back({"conv2d_forward 3x3 s2", ser, omp, bitwise_equal(out_ref, out_omp), flops * 1e-9});
    }
    {
        Tensor in = randn({B, C, H, H}, rng);
        const int OH = (H + 2 - 3) / 2 + 1;
        Tensor gout = randn({B, OC, OH, OH}, rng);
        Tensor gw_ref({OC, C, 3, 3}), gw_omp({OC, C, 3, 3});
        Tensor gb_ref({OC}), gb_omp({OC});
        const double ser = time_best_ms([&] {
            gw_ref.zero(); gb_ref.zero();
            ref::conv2d_backward_weights(gout.data(), in.data(), B, C, H, H, OC, 3, 3, 2, 1,
                                         gw_ref.data(), gb_ref.data());
        }, repeats);
        const double omp = time_best_ms([&] {
            gw_omp.zero(); gb_omp.zero();
            kern::conv2d_backward_weights(gout.data(), in.data(), B, C, H, H, OC, 3, 3, 2, 1,
                                          gw_omp.data(), gb_omp.data());
        }, repeats);
        const double flops = 2.0 * B * OC * OH * OH * C * 9;
        cases.push_back({"conv2d_backward_weights", ser, omp, bitwise_equal(gw_ref, gw_omp), flops * 1e-9});
    }
    {
        Tensor in = randn({B, C, H, H}, rng);
        Tensor gamma = randn({C}, rng), beta = randn({C}, rng);
        Tensor rm_ref({C}), rv_ref({C}), rm_omp({C}), rv_omp({C});
        rv_ref.fill(1); rv_omp.fill(1);
        Tensor sm({C}), si({C});
        Tensor out_ref = Tensor::zeros_like(in), out_omp = Tensor::zeros_like(in);
        const double ser = time_best_ms([&] {
            ref::bn2d_forward_train(in.data(), B, C, H, H, gamma.data(), beta.data(), 1e-5, 0.1,
                                    rm_ref.data(), rv_ref.data(), sm.data(), si.data(), out_ref.data());
        }, repeats);
        const double omp = time_best_ms([&] {
            kern::bn2d_forward_train(in.data(), B, C, H, H, gamma.data(), beta.data(), 1e-5, 0.1,
                                     rm_omp.data(), rv_omp.data(), sm.data(), si.data(), out_omp.data());
        }, repeats);
        const double flops = 6.0 * in.size();
        cases.push_back({"bn2d_forward_train", ser, omp, bitwise_equal(out_ref, out_omp), flops * 1e-9});
    }
    {
        const int K = 16, G = quick ? 16 : 64;
        Tensor in = randn({K, G, G}, rng);
        Tensor out_ref = Tensor::zeros_like(in), out_omp = Tensor::zeros_like(in);
        const double m[6] = {0.97, -0.16, 4.0, 0.16, 0.97, -3.0};
        const double ser = time_best_ms([&] {
            ref::warp_bilinear_forward(in.data(), K, G, G, m, out_ref.data());
        }, repeats);
        const double omp = time_best_ms([&] {
            kern::warp_bilinear_forward(in.data(), K, G, G, m, out_omp.data());
        }, repeats);
        const double flops = 12.0 * in.size();
        cases.push_back({"warp_bilinear_forward", ser, omp, bitwise_equal(out_ref, out_omp), flops * 1e-9});
    }

    std::printf("%-28s %10s %10s %8s %10s %s\n", "kernel", "serial ms", "omp ms", "speedup",
                "omp GF/s", "bitwise");
    bool all_equal = true;
    for (const auto& c : cases) {
        std::printf("%-28s %10.3f %10.3f %7.2fx %10.2f %s\n", c.name.c_str(), c.serial_ms,
                    c.omp_ms, c.serial_ms / c.omp_ms, c.gflop / (c.omp_ms * 1e-3),
                    c.equal ? "ok" : "MISMATCH");
        all_equal = all_equal && c.equal;
    }
    return all_equal ? 0 : 1;
}
