#pragma once

// Command-line front end, as a library so the acceptance driver and the
// tests can call it in-process. `run` parses argv-style arguments, writes
// the report to the configured output (or `out`) and returns the exit code:
// 0 ok, 1 verification failure, 2 usage, 3 evaluation error.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "oseen_rotor/expansion.hpp"
#include "oseen_rotor/inequality_lab.hpp"

namespace oseen_rotor::cli {

using Json = nlohmann::ordered_json;

enum class Format { csv, json };

/// Defaults: tau = rho = 1, S1 = 2, S = 4, S_max = 400, QuadSpec defaults,
/// seed 1, jobs from OSEEN_ROTOR_JOBS, JSON to stdout.
struct RunConfig {
  FlowParams params{1.0, 1.0};
  QuadSpec spec;
  LabGeometry geometry;
  std::uint64_t seed = 1;
  int jobs = 1;
  std::string output_path;
  Format format = Format::json;
};

RunConfig default_config();

/// The config as embedded in reports. Scheduling (jobs) and the output path
/// do not affect results and are left out, so reports are byte-identical
/// across thread counts.
Json config_to_json(const RunConfig& cfg);

/// JSON object with any of: tau, rho, rel_tol, abs_tol, split_point,
/// max_subdivisions, tail_map, seed, jobs, output, format, S1, S, S_max.
void apply_config_json(RunConfig& cfg, const Json& j);
void apply_config_file(RunConfig& cfg, const std::string& path);

class UsageError : public Error {
 public:
  using Error::Error;
};

Vec3 parse_vec3(const std::string& text);
MultiIndex parse_multi_index(const std::string& text);
/// "r0:r1:n", geometric spacing.
std::vector<double> parse_radii(const std::string& text);
/// downstream (e1), transverse (e2), upstream (-e1) or "a,b,c" (normalised).
Vec3 parse_ray(const std::string& text);
/// Decimal or p/q.
double parse_number(const std::string& text);

// File formats (header row, one record per line):
//   mesh:  x1,x2,x3,n1,n2,n3,w
//   data:  u1,u2,u3,g11,...,g33,pi     (g_kl = d_l u_k, rows match the mesh)
//   force: x1,x2,x3,w,f1,f2,f3
//   field: JSON {"type": "synthetic", "swirl", "source", "center", "body_radius"}
BoundaryMesh read_mesh_csv(const std::string& path);
void write_mesh_csv(const std::string& path, const BoundaryMesh& mesh);
SurfaceData read_surface_csv(const std::string& path);
void write_surface_csv(const std::string& path, const SurfaceData& data);
ForceSamples read_force_csv(const std::string& path);
void write_force_csv(const std::string& path, const ForceSamples& force);
ExteriorField read_field_json(const std::string& path, const FlowParams& params);

struct SyntheticDataset {
  BoundaryMesh mesh;
  SurfaceData data;
  ForceSamples force;
  Json field_spec;
};

/// Unit-sphere mesh (32 x 64), traces of the synthetic field with pressure
/// 0.3 y1, a bump force of mass (1, 1/2, 0) at (3/2, 0, 0).
SyntheticDataset synthetic_dataset(const FlowParams& params);
ExteriorField field_from_json(const Json& j, const FlowParams& params);
void write_synthetic_dataset(const std::string& dir, const FlowParams& params);

Json to_json(const DecayReport& r);
Json to_json(const LemmaVerdict& v);

struct SuiteOptions {
  std::vector<double> sphere_betas{1.5, 2.0, 3.0};
  int shift_samples = 100000;
  std::int64_t conv_budget = std::int64_t{1} << 18;
};

inline const std::vector<std::string> kSuites{"sphere", "time-far", "time-near",
                                              "z-far", "conv", "repeating"};

std::vector<LemmaVerdict> run_suite(const std::string& suite, const RunConfig& cfg,
                                    const SuiteOptions& opt = {});

struct Report {
  std::string suite;
  Json config;
  std::vector<Json> records;
  Json summary;
  Json header;  // extra top-level fields (expand)
};

std::string render(const Report& report, Format format);

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace oseen_rotor::cli
