#include <doctest.h>

#include "hierwm/kernels.hpp"
#include "hierwm/rng.hpp"
#include "hierwm/tensor.hpp"

using namespace hierwm;

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng) { return rng.normal_tensor(std::move(shape)); }

}  // namespace

TEST_CASE("matmul matches serial reference bitwise in all transpose modes") {
    Rng rng(101);
    const int m = 17, k = 23, n = 13;
    for (int ta = 0; ta < 2; ++ta) {
        for (int tb = 0; tb < 2; ++tb) {
            Tensor A = random_tensor(ta ? std::vector<int>{k, m} : std::vector<int>{m, k}, rng);
            Tensor B = random_tensor(tb ? std::vector<int>{n, k} : std::vector<int>{k, n}, rng);
            Tensor C1({m, n}), C2({m, n});
            kern::matmul(A.ptr(), B.ptr(), C1.ptr(), m, k, n, ta, tb);
            kern::serial::matmul(A.ptr(), B.ptr(), C2.ptr(), m, k, n, ta, tb);
            CHECK(bitwise_equal(C1, C2));
        }
    }
}

TEST_CASE("matmul against a plain triple-loop oracle") {
    Rng rng(7);
    const int m = 5, k = 9, n = 4;
    Tensor A = random_tensor({m, k}, rng);
    Tensor B = random_tensor({k, n}, rng);
    Tensor C({m, n});
    kern::matmul(A.ptr(), B.ptr(), C.ptr(), m, k, n);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int p = 0; p < k; ++p) acc += A[i * k + p] * B[p * n + j];
            CHECK(C[i * n + j] == doctest::Approx(acc).epsilon(1e-12));
        }
}

TEST_CASE("matmul accumulate adds on top of existing output") {
    Rng rng(8);
    const int m = 3, k = 4, n = 2;
    Tensor A = random_tensor({m, k}, rng);
    Tensor B = random_tensor({k, n}, rng);
    Tensor C0 = random_tensor({m, n}, rng);
    Tensor C = C0;
    Tensor P({m, n});
    kern::matmul(A.ptr(), B.ptr(), P.ptr(), m, k, n);
    kern::matmul(A.ptr(), B.ptr(), C.ptr(), m, k, n, false, false, true);
    for (int i = 0; i < m * n; ++i) CHECK(C[i] == doctest::Approx(C0[i] + P[i]).epsilon(1e-12));
}

TEST_CASE("conv2d matches serial reference bitwise") {
    Rng rng(55);
    const int h = 16, w = 16, cin = 3, cout = 8;
    Tensor in = random_tensor({h, w, cin}, rng);
    Tensor wt = random_tensor({5, 5, cin, cout}, rng);
    Tensor bias = random_tensor({cout}, rng);
    const int oh = (h + 4 - 5) / 4 + 1;
    Tensor o1({oh, oh, cout}), o2({oh, oh, cout});
    kern::conv2d(in.ptr(), h, w, cin, wt.ptr(), 5, 5, cout, bias.ptr(), 4, 2, o1.ptr());
    kern::serial::conv2d(in.ptr(), h, w, cin, wt.ptr(), 5, 5, cout, bias.ptr(), 4, 2, o2.ptr());
    CHECK(bitwise_equal(o1, o2));
}

TEST_CASE("conv2d identity kernel reproduces input") {
    Rng rng(3);
    const int h = 8, w = 8, c = 3;
    Tensor in = random_tensor({h, w, c}, rng);
    Tensor wt({1, 1, c, c});
    for (int i = 0; i < c; ++i) wt[i * c + i] = 1.0;
    Tensor out({h, w, c});
    kern::conv2d(in.ptr(), h, w, c, wt.ptr(), 1, 1, c, nullptr, 1, 0, out.ptr());
    CHECK(bitwise_equal(in, out));
}
