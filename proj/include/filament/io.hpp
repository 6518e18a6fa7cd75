#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "filament/curve.hpp"
#include "filament/frame.hpp"
#include "filament/nls.hpp"
#include "filament/ratefit.hpp"
#include "filament/scattering.hpp"
#include "filament/selfsimilar.hpp"

namespace filament::io {

// 17-significant-digit shortest form, '.' decimal separator.
std::string format_double(double v);

// Rows of already-formatted cells; '\n' line ends, header first.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

void write_curve_csv(const std::filesystem::path& path, const Curve& c);
void write_frame_csv(const std::filesystem::path& path, const FrameField& f);
void write_frenet_csv(const std::filesystem::path& path, const FrenetData& fd);

// Profile + corner data document per the serialization contract.
nlohmann::ordered_json profile_json(const SelfSimilarProfile& p);

nlohmann::ordered_json ratefit_json(const RateFit& f);
nlohmann::ordered_json hypothesis_json(const HypothesisReport& rep);

// Trajectory directory: manifest.json {grid, times, gauge} plus one slice file
// per time (CSV x,re,im or little-endian interleaved re/im binary).
void write_trajectory(const std::filesystem::path& dir, const Trajectory& traj,
                      const GaugeSpec& gauge, bool binary = false);

// Reads a two/three column CSV (x, c [, tau]); returns the rows.
struct SampledColumns {
  std::vector<double> x, c, tau;
};
SampledColumns read_columns_csv(const std::filesystem::path& path);

}  // namespace filament::io
