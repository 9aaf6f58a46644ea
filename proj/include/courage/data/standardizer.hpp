#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "courage/data/windows.hpp"
#include "courage/error.hpp"
#include "courage/util/binary_io.hpp"
#include "courage/util/hash.hpp"

namespace courage::data {

/// Per-feature-row and per-target z-scoring fitted on training windows only.
class Standardizer {
public:
    static constexpr double kMinStd = 1e-8;

    Standardizer() = default;

    static Standardizer fit(const std::vector<SampleWindow>& train) {
        if (train.empty()) throw ConfigError("Standardizer::fit: no training windows");
        const std::size_t k = train.front().features.rows();
        Standardizer s;
        s.feature_mean_.assign(k, 0.0);
        s.feature_std_.assign(k, 0.0);

        double count = 0.0;
        for (const auto& w : train) {
            if (w.features.rows() != k) throw DimensionError("Standardizer::fit: inconsistent feature count");
            for (std::size_t r = 0; r < k; ++r)
                for (double v : w.features.row(r)) s.feature_mean_[r] += v;
            count += static_cast<double>(w.features.cols());
        }
        for (auto& m : s.feature_mean_) m /= count;
        for (const auto& w : train)
            for (std::size_t r = 0; r < k; ++r)
                for (double v : w.features.row(r)) s.feature_std_[r] += (v - s.feature_mean_[r]) * (v - s.feature_mean_[r]);
        for (auto& v : s.feature_std_) v = clamp_std(std::sqrt(v / count));

        const auto n = static_cast<double>(train.size());
        for (const auto& w : train) {
            s.target_mean_[0] += w.target1;
            s.target_mean_[1] += w.target2;
        }
        s.target_mean_[0] /= n;
        s.target_mean_[1] /= n;
        for (const auto& w : train) {
            s.target_std_[0] += (w.target1 - s.target_mean_[0]) * (w.target1 - s.target_mean_[0]);
            s.target_std_[1] += (w.target2 - s.target_mean_[1]) * (w.target2 - s.target_mean_[1]);
        }
        s.target_std_[0] = clamp_std(std::sqrt(s.target_std_[0] / n));
        s.target_std_[1] = clamp_std(std::sqrt(s.target_std_[1] / n));
        s.fitted_ = true;
        return s;
    }

    [[nodiscard]] bool fitted() const noexcept { return fitted_; }

    [[nodiscard]] SampleWindow apply(const SampleWindow& raw) const {
        require_fitted("apply");
        if (raw.standardizer_hash != 0) throw StateError("Standardizer::apply: window is already standardized");
        if (raw.features.rows() != feature_mean_.size()) throw DimensionError("Standardizer::apply: feature count mismatch");
        SampleWindow w = raw;
        for (std::size_t r = 0; r < w.features.rows(); ++r)
            for (auto& v : w.features.row(r)) v = (v - feature_mean_[r]) / feature_std_[r];
        w.target1 = (raw.target1 - target_mean_[0]) / target_std_[0];
        w.target2 = (raw.target2 - target_mean_[1]) / target_std_[1];
        w.standardizer_hash = hash();
        return w;
    }

    [[nodiscard]] std::vector<SampleWindow> apply(const std::vector<SampleWindow>& raw) const {
        std::vector<SampleWindow> out;
        out.reserve(raw.size());
        for (const auto& w : raw) out.push_back(apply(w));
        return out;
    }

    [[nodiscard]] SampleWindow inverse(const SampleWindow& z) const {
        require_fitted("inverse");
        if (z.standardizer_hash != hash()) throw MismatchError("Standardizer::inverse: window standardized elsewhere");
        SampleWindow w = z;
        for (std::size_t r = 0; r < w.features.rows(); ++r)
            for (auto& v : w.features.row(r)) v = v * feature_std_[r] + feature_mean_[r];
        w.target1 = destandardize_target(0, z.target1);
        w.target2 = destandardize_target(1, z.target2);
        w.standardizer_hash = 0;
        return w;
    }

    /// Maps a standardized prediction for horizon 0 (Week 1) or 1 (Week 2) back to deaths.
    [[nodiscard]] double destandardize_target(std::size_t horizon, double z) const {
        require_fitted("destandardize_target");
        return z * target_std_.at(horizon) + target_mean_.at(horizon);
    }

    [[nodiscard]] const std::vector<double>& feature_mean() const noexcept { return feature_mean_; }
    [[nodiscard]] const std::vector<double>& feature_std() const noexcept { return feature_std_; }
    [[nodiscard]] const std::array<double, 2>& target_mean() const noexcept { return target_mean_; }
    [[nodiscard]] const std::array<double, 2>& target_std() const noexcept { return target_std_; }

    /// Fingerprint of the fitted statistics; never 0 for a fitted standardizer.
    [[nodiscard]] std::uint64_t hash() const {
        Fnv1a h;
        h.update(std::span<const double>(feature_mean_));
        h.update(std::span<const double>(feature_std_));
        h.update(std::span<const double>(target_mean_));
        h.update(std::span<const double>(target_std_));
        const auto d = h.digest();
        return d == 0 ? 1 : d;
    }

    void write(io::BinaryWriter& w) const {
        require_fitted("write");
        w.f64s(feature_mean_);
        w.f64s(feature_std_);
        w.f64(target_mean_[0]);
        w.f64(target_mean_[1]);
        w.f64(target_std_[0]);
        w.f64(target_std_[1]);
    }

    static Standardizer read(io::BinaryReader& r) {
        Standardizer s;
        s.feature_mean_ = r.f64s();
        s.feature_std_ = r.f64s();
        s.target_mean_ = {r.f64(), r.f64()};
        s.target_std_ = {r.f64(), r.f64()};
        if (s.feature_mean_.size() != s.feature_std_.size()) throw FormatError(r.source() + ": standardizer size mismatch");
        s.fitted_ = true;
        return s;
    }

    friend bool operator==(const Standardizer&, const Standardizer&) = default;

private:
    static double clamp_std(double s) { return s < kMinStd ? 1.0 : s; }

    void require_fitted(const char* op) const {
        if (!fitted_) throw StateError(std::string("Standardizer::") + op + " called before fit");
    }

    std::vector<double> feature_mean_;
    std::vector<double> feature_std_;
    std::array<double, 2> target_mean_{};
    std::array<double, 2> target_std_{};
    bool fitted_ = false;
};

} // namespace courage::data
