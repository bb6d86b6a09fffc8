#pragma once

#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "uicrop/edge.hpp"

namespace uicrop {

// Default hard-case threshold in nats, calibrated against 2048x2048-padded
// spectra of 1920x1080 screens. Config value, adjustable everywhere.
inline constexpr double kDefaultHMin = 9.0;

struct Spectrum {
    int rows = 0;  // padded, power of two (minimum 2 so fftshift stays even)
    int cols = 0;
    int src_rows = 0;
    int src_cols = 0;
    std::vector<std::complex<double>> coeffs;  // row-major

    const std::complex<double>& at(int r, int c) const {
        return coeffs[static_cast<size_t>(r) * cols + c];
    }
};

struct EntropyReport {
    double entropy = 0.0;       // nats
    double total_energy = 0.0;  // sum |F|^2
    int rows = 0;               // source matrix dims
    int cols = 0;
    bool is_hard = false;
    bool degenerate = false;    // all-zero matrix
};

// Forward 2-D DFT of the matrix zero-padded to powers of two, radix-2 FFT
// over rows then columns.
Spectrum dft2(const InfoMatrix& m);

// Quadrant swap moving the zero-frequency bin to the center. Involution.
Spectrum fftshift(const Spectrum& s);

// Shannon entropy of the normalized power spectrum, natural log.
// Zero total energy yields entropy 0 with the degenerate flag set.
EntropyReport spectral_entropy(const Spectrum& s, double h_min = kDefaultHMin);

// Ids with entropy strictly above h_min, ordered by entropy descending
// (stable for ties).
std::vector<std::string> select_visual_hard_cases(
    const std::vector<std::pair<std::string, EntropyReport>>& reports, double h_min);

}  // namespace uicrop
