#include "filament/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace filament::io {

namespace {

void ensure_parent(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = {}) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary | mode);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  return out;
}

nlohmann::ordered_json vec3_json(const Vec3& v) {
  return nlohmann::ordered_json::array({v.x, v.y, v.z});
}

nlohmann::ordered_json cvec3_json(const CVec3& v) {
  nlohmann::ordered_json j;
  j["re"] = vec3_json(v.real());
  j["im"] = vec3_json(v.imag());
  return j;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  auto out = open_out(path);
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

void write_curve_csv(const std::filesystem::path& path, const Curve& c) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(c.grid.n);
  for (std::size_t j = 0; j < c.grid.n; ++j) {
    rows.push_back({format_double(c.grid.node(j)), format_double(c.points[j].x),
                    format_double(c.points[j].y), format_double(c.points[j].z)});
  }
  write_csv(path, {"x", "px", "py", "pz"}, rows);
}

void write_frame_csv(const std::filesystem::path& path, const FrameField& f) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(f.grid.n);
  for (std::size_t j = 0; j < f.grid.n; ++j) {
    rows.push_back({format_double(f.grid.node(j)), format_double(f.T[j].x),
                    format_double(f.T[j].y), format_double(f.T[j].z), format_double(f.e1[j].x),
                    format_double(f.e1[j].y), format_double(f.e1[j].z), format_double(f.e2[j].x),
                    format_double(f.e2[j].y), format_double(f.e2[j].z)});
  }
  write_csv(path, {"x", "Tx", "Ty", "Tz", "e1x", "e1y", "e1z", "e2x", "e2y", "e2z"}, rows);
}

void write_frenet_csv(const std::filesystem::path& path, const FrenetData& fd) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(fd.grid.n);
  for (std::size_t j = 0; j < fd.grid.n; ++j) {
    rows.push_back({format_double(fd.grid.node(j)), format_double(fd.c[j]),
                    format_double(fd.tau[j])});
  }
  write_csv(path, {"x", "c", "tau"}, rows);
}

nlohmann::ordered_json profile_json(const SelfSimilarProfile& p) {
  nlohmann::ordered_json j;
  j["alpha"] = p.alpha;
  j["theta_measured"] = p.corner.theta;
  j["theta_formula"] = angle_from_alpha(p.alpha);
  j["A_plus"] = vec3_json(p.corner.A_plus);
  j["A_minus"] = vec3_json(p.corner.A_minus);
  j["B_plus"] = cvec3_json(p.corner.B_plus);
  j["B_minus"] = cvec3_json(p.corner.B_minus);
  j["A_dot"] = dot(p.corner.A_plus, p.corner.A_minus);
  j["tail_window"] = nlohmann::ordered_json::array({p.tail_lo, p.tail_hi});
  j["frame_defect"] = frame_orthonormality_defect(p.profile_frame);
  return j;
}

nlohmann::ordered_json ratefit_json(const RateFit& f) {
  nlohmann::ordered_json j;
  j["quantity"] = f.quantity;
  j["exponent"] = f.exponent;
  j["ci95"] = f.ci95;
  j["intercept"] = f.intercept;
  j["target"] = f.target;
  j["degenerate"] = f.degenerate;
  j["n_points"] = f.t.size();
  return j;
}

nlohmann::ordered_json hypothesis_json(const HypothesisReport& rep) {
  nlohmann::ordered_json j;
  for (const auto& e : rep.entries) {
    nlohmann::ordered_json entry;
    entry["value"] = e.value;
    entry["suspect"] = e.suspect;
    j[e.name] = entry;
  }
  j["node_at_zero_excluded"] = rep.node_at_zero_excluded;
  return j;
}

void write_trajectory(const std::filesystem::path& dir, const Trajectory& traj,
                      const GaugeSpec& gauge, bool binary) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["grid"] = {{"x_min", traj.grid.x_min}, {"h", traj.grid.h}, {"n", traj.grid.n}};
  manifest["times"] = traj.times;
  manifest["gauge"] = {{"kind", gauge.kind == GaugeSpec::Kind::zero ? "zero" : "critical"},
                       {"alpha", gauge.alpha}};
  manifest["format"] = binary ? "bin" : "csv";
  {
    auto out = open_out(dir / "manifest.json");
    out << manifest.dump(2) << '\n';
  }
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof(name), "slice_%04zu.%s", k, binary ? "bin" : "csv");
    if (binary) {
      auto out = open_out(dir / name);
      // little-endian interleaved re/im doubles
      for (const auto& v : traj.slices[k]) {
        const double re = v.real(), im = v.imag();
        out.write(reinterpret_cast<const char*>(&re), sizeof(double));
        out.write(reinterpret_cast<const char*>(&im), sizeof(double));
      }
    } else {
      std::vector<std::vector<std::string>> rows;
      rows.reserve(traj.grid.n);
      for (std::size_t j = 0; j < traj.grid.n; ++j) {
        rows.push_back({format_double(traj.grid.node(j)),
                        format_double(traj.slices[k][j].real()),
                        format_double(traj.slices[k][j].imag())});
      }
      write_csv(dir / name, {"x", "re", "im"}, rows);
    }
  }
}

SampledColumns read_columns_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path.string());
  SampledColumns cols;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {  // header
      first = false;
      continue;
    }
    std::istringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    if (vals.size() < 2) throw std::runtime_error("bad CSV row in " + path.string());
    cols.x.push_back(vals[0]);
    cols.c.push_back(vals[1]);
    cols.tau.push_back(vals.size() > 2 ? vals[2] : 0.0);
  }
  return cols;
}

}  // namespace filament::io
