#include "uicrop/spectral.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace uicrop {

namespace {

int next_pow2(int n) {
    int p = 2;  // keep dimensions even for fftshift
    while (p < n) p *= 2;
    return p;
}

// In-place iterative radix-2 forward FFT (negative exponent).
void fft_inplace(std::complex<double>* a, int n) {
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * M_PI / len;
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (int i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (int k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

}  // namespace

Spectrum dft2(const InfoMatrix& m) {
    Spectrum s;
    s.src_rows = m.rows();
    s.src_cols = m.cols();
    s.rows = next_pow2(m.rows());
    s.cols = next_pow2(m.cols());
    s.coeffs.assign(static_cast<size_t>(s.rows) * s.cols, {0.0, 0.0});

    for (int r = 0; r < m.rows(); ++r) {
        for (int c = 0; c < m.cols(); ++c) {
            s.coeffs[static_cast<size_t>(r) * s.cols + c] = {static_cast<double>(m.at(r, c)),
                                                             0.0};
        }
    }

    // Rows beyond the source are all zero; their transforms stay zero.
    for (int r = 0; r < m.rows(); ++r) {
        fft_inplace(&s.coeffs[static_cast<size_t>(r) * s.cols], s.cols);
    }
    std::vector<std::complex<double>> col(s.rows);
    for (int c = 0; c < s.cols; ++c) {
        for (int r = 0; r < s.rows; ++r) col[r] = s.coeffs[static_cast<size_t>(r) * s.cols + c];
        fft_inplace(col.data(), s.rows);
        for (int r = 0; r < s.rows; ++r) s.coeffs[static_cast<size_t>(r) * s.cols + c] = col[r];
    }

#ifndef NDEBUG
    // Parseval: sum |F|^2 == N * (count of ones) for a binary input.
    {
        double energy = 0.0;
        for (const auto& z : s.coeffs) energy += std::norm(z);
        const double expected =
            static_cast<double>(s.rows) * s.cols * static_cast<double>(m.ones());
        if (expected > 0) {
            assert(std::abs(energy - expected) <= 1e-6 * expected);
        } else {
            assert(energy <= 1e-9);
        }
    }
#endif
    return s;
}

Spectrum fftshift(const Spectrum& s) {
    Spectrum out = s;
    const int hr = s.rows / 2;
    const int hc = s.cols / 2;
    for (int r = 0; r < s.rows; ++r) {
        for (int c = 0; c < s.cols; ++c) {
            out.coeffs[static_cast<size_t>((r + hr) % s.rows) * s.cols + (c + hc) % s.cols] =
                s.coeffs[static_cast<size_t>(r) * s.cols + c];
        }
    }
    return out;
}

EntropyReport spectral_entropy(const Spectrum& s, double h_min) {
    EntropyReport rep;
    rep.rows = s.src_rows;
    rep.cols = s.src_cols;

    double total = 0.0;
    for (const auto& z : s.coeffs) total += std::norm(z);
    rep.total_energy = total;
    if (total <= 0.0) {
        rep.degenerate = true;
        return rep;
    }

    double h = 0.0;
    for (const auto& z : s.coeffs) {
        const double p = std::norm(z) / total;
        if (p > 0.0) h -= p * std::log(p);
    }
    rep.entropy = h;
    rep.is_hard = h > h_min;
    return rep;
}

std::vector<std::string> select_visual_hard_cases(
    const std::vector<std::pair<std::string, EntropyReport>>& reports, double h_min) {
    std::vector<std::pair<std::string, double>> hard;
    for (const auto& [id, rep] : reports) {
        if (!rep.degenerate && rep.entropy > h_min) hard.emplace_back(id, rep.entropy);
    }
    std::stable_sort(hard.begin(), hard.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<std::string> ids;
    ids.reserve(hard.size());
    for (const auto& [id, h] : hard) ids.push_back(id);
    return ids;
}

}  // namespace uicrop
