#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "stllab/error.hpp"
#include "stllab/format.hpp"

namespace stllab {

/// Strictly increasing, positive analysis frequencies (Hz).
class FrequencyGrid {
public:
    FrequencyGrid() = default;

    explicit FrequencyGrid(std::vector<double> freqs) : freqs_(std::move(freqs)) {
        if (freqs_.empty()) throw ConfigError("frequency grid is empty");
        for (std::size_t i = 0; i < freqs_.size(); ++i) {
            if (!(freqs_[i] > 0.0) || !std::isfinite(freqs_[i]))
                throw ConfigError("frequency grid: entry " + std::to_string(i) + " is not a positive finite value");
            if (i > 0 && !(freqs_[i] > freqs_[i - 1]))
                throw ConfigError("frequency grid: not strictly increasing at entry " + std::to_string(i));
        }
    }

    /// n frequencies spaced geometrically over [f_lo, f_hi], endpoints included.
    static FrequencyGrid geometric(double f_lo, double f_hi, int n) {
        if (n < 1) throw ConfigError("frequency grid needs at least one point");
        if (n == 1) return FrequencyGrid({f_lo});
        if (!(f_lo > 0.0 && f_hi > f_lo)) throw ConfigError("frequency grid needs 0 < f_lo < f_hi");
        std::vector<double> f(static_cast<std::size_t>(n));
        const double ratio = std::log(f_hi / f_lo);
        for (int i = 0; i < n; ++i) f[static_cast<std::size_t>(i)] = f_lo * std::exp(ratio * i / (n - 1));
        f.back() = f_hi;
        return FrequencyGrid(std::move(f));
    }

    /// 128 geometric points, 50-2500 Hz.
    static FrequencyGrid standard() { return geometric(50.0, 2500.0, 128); }

    const std::vector<double>& values() const { return freqs_; }
    std::size_t size() const { return freqs_.size(); }
    double operator[](std::size_t i) const { return freqs_[i]; }
    double max() const { return freqs_.back(); }
    double min() const { return freqs_.front(); }

private:
    std::vector<double> freqs_;
};

/// Base-10 one-third-octave bands: edges at center * 10^(-+1/20).
class BandScheme {
public:
    BandScheme() = default;

    explicit BandScheme(std::vector<double> centers) : centers_(std::move(centers)) {
        if (centers_.empty()) throw ConfigError("band scheme is empty");
        for (std::size_t i = 1; i < centers_.size(); ++i)
            if (!(centers_[i] > centers_[i - 1])) throw ConfigError("band centers must be strictly increasing");
    }

    /// Bands with exact centers 1000 * 10^(k/10) for k in [k_lo, k_hi].
    static BandScheme third_octave(int k_lo, int k_hi) {
        std::vector<double> c;
        for (int k = k_lo; k <= k_hi; ++k) c.push_back(1000.0 * std::pow(10.0, k / 10.0));
        return BandScheme(std::move(c));
    }

    /// 16 bands, 63 Hz to 2 kHz.
    static BandScheme standard() { return third_octave(-12, 3); }

    const std::vector<double>& centers() const { return centers_; }
    std::size_t size() const { return centers_.size(); }
    double lower(std::size_t i) const { return centers_[i] * std::pow(10.0, -1.0 / 20.0); }
    double upper(std::size_t i) const { return centers_[i] * std::pow(10.0, 1.0 / 20.0); }

private:
    std::vector<double> centers_;
};

/// STL values (dB) on either a narrowband grid or band centers.
struct StlCurve {
    std::vector<double> frequencies; // grid frequencies or band centers, Hz
    std::vector<double> stl_db;
    bool banded = false;

    std::size_t size() const { return stl_db.size(); }
};

inline double stl_from_tau(double tau) { return -10.0 * std::log10(tau); }
inline double tau_from_stl(double stl_db) { return std::pow(10.0, -stl_db / 10.0); }

/// Energy band average: per band, -10 log10(mean tau over in-band grid points).
/// A grid point on a shared edge belongs to the upper band.
inline StlCurve band_average(const StlCurve& curve, const BandScheme& bands) {
    if (curve.banded) throw ConfigError("band_average: input curve is already banded");
    StlCurve out;
    out.banded = true;
    out.frequencies = bands.centers();
    out.stl_db.resize(bands.size());
    for (std::size_t b = 0; b < bands.size(); ++b) {
        const double lo = bands.lower(b);
        const double hi = bands.upper(b);
        double sum = 0.0;
        int count = 0;
        for (std::size_t i = 0; i < curve.size(); ++i) {
            const double f = curve.frequencies[i];
            if (f >= lo && f < hi) {
                sum += tau_from_stl(curve.stl_db[i]);
                ++count;
            }
        }
        if (count == 0) {
            std::ostringstream msg;
            msg << "band_average: band " << b << " (center " << format_double(bands.centers()[b]) << " Hz, ["
                << format_double(lo) << ", " << format_double(hi) << ") Hz) contains no grid frequency";
            throw ConfigError(msg.str());
        }
        out.stl_db[b] = stl_from_tau(sum / count);
    }
    return out;
}

inline std::string curve_to_csv(const StlCurve& c) {
    std::string s = c.banded ? "band_center_hz,stl_db\n" : "freq_hz,stl_db\n";
    for (std::size_t i = 0; i < c.size(); ++i) s += format_double(c.frequencies[i]) + "," + format_double(c.stl_db[i]) + "\n";
    return s;
}

} // namespace stllab
