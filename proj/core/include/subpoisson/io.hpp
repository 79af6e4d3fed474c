#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "subpoisson/criteria.hpp"
#include "subpoisson/detector.hpp"
#include "subpoisson/distributions.hpp"
#include "subpoisson/pipeline.hpp"

namespace subpoisson::io {

/// Twin-beam parameters as a flat JSON object {Mp, Bp, Ms, Bs, Mi, Bi}.
TwinBeamParams read_twb_params(const std::filesystem::path& file);
void write_twb_params(const TwinBeamParams& params, const std::filesystem::path& file);

/// Detector pair from JSON: {"signal": {...}, "idler": {...}}, each with keys
/// N and eta plus either D (per pixel) or d (total mean dark rate); D wins if
/// both are present. {"identity": true, "size": K} yields an identity response
/// for testing. A single flat object is accepted where only one detector is
/// needed.
struct DetectorSpec {
  std::optional<DetectorParams> params;  // empty for identity
  int identity_size = -1;                // -1 = size from data
  bool is_identity() const { return !params.has_value(); }
  DetectionMatrix build(int c_max, int n_max) const;
};
struct DetectorPair {
  DetectorSpec signal;
  DetectorSpec idler;
};
DetectorPair read_detectors(const std::filesystem::path& file);
DetectorSpec read_single_detector(const std::filesystem::path& file, const std::string& role);

/// Joint histogram CSV with header "cs,ci,count".
JointHistogram read_joint_csv(const std::filesystem::path& file);
void write_joint_csv(const JointHistogram& joint, const std::filesystem::path& file);

/// Count distribution CSV with header "n,p" (any first column name accepted).
CountDistribution read_distribution_csv(const std::filesystem::path& file);
void write_distribution_csv(const CountDistribution& dist, const std::filesystem::path& file,
                            const std::string& abscissa = "n", const std::string& value = "p");

/// Two-column CSV of grid data.
void write_grid_csv(std::span<const double> x, std::span<const double> y,
                    const std::filesystem::path& file, const std::string& xname,
                    const std::string& yname);

std::string criteria_report_json(const CriteriaReport& report);
void write_criteria_csv(const CriteriaReport& report, std::ostream& out);

/// Run manifest: command, inputs, seed, outputs, convention notes. Written
/// alongside output files; every listed output exists by the time the manifest
/// lands on disk.
class Manifest {
 public:
  Manifest(std::string command, std::vector<std::string> argv);
  void set_seed(std::uint64_t seed);
  void add_input(const std::string& role, const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);
  void add_note(const std::string& key, const std::string& value);
  void write(const std::filesystem::path& file) const;

 private:
  std::string command_;
  std::vector<std::string> argv_;
  std::optional<std::uint64_t> seed_;
  std::vector<std::pair<std::string, std::string>> inputs_;
  std::vector<std::string> outputs_;
  std::vector<std::pair<std::string, std::string>> notes_;
};

}  // namespace subpoisson::io
