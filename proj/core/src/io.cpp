#include "subpoisson/io.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace subpoisson::io {

using nlohmann::json;

namespace {

json load_json(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ParameterDomainError("cannot open " + file.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParameterDomainError("malformed JSON in " + file.string() + ": " + e.what());
  }
  return j;
}

void save_text(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file);
  if (!out) throw ParameterDomainError("cannot write " + file.string());
  out << text;
}

double require_number(const json& j, const std::string& key, const std::string& context) {
  if (!j.contains(key) || !j[key].is_number()) {
    throw ParameterDomainError(context + ": missing numeric key '" + key + "'");
  }
  return j[key].get<double>();
}

DetectorSpec parse_detector(const json& j, const std::string& context) {
  DetectorSpec spec;
  if (j.contains("identity") && j["identity"].get<bool>()) {
    spec.identity_size = j.value("size", -1);
    return spec;
  }
  DetectorParams p;
  p.N = static_cast<long long>(require_number(j, "N", context));
  p.eta = require_number(j, "eta", context);
  if (j.contains("D")) {
    p.D = j["D"].get<double>();  // per-pixel form wins when both are given
  } else if (j.contains("d")) {
    p.D = j["d"].get<double>() / static_cast<double>(p.N);
  } else {
    p.D = 0.0;
  }
  p.validate();
  spec.params = p;
  return spec;
}

}  // namespace

DetectionMatrix DetectorSpec::build(int c_max, int n_max) const {
  if (is_identity()) {
    const int size = identity_size > 0 ? identity_size : std::max(c_max, n_max) + 1;
    return DetectionMatrix::identity(size);
  }
  return detection_matrix(*params, c_max, n_max);
}

TwinBeamParams read_twb_params(const std::filesystem::path& file) {
  const json j = load_json(file);
  TwinBeamParams p;
  p.Mp = require_number(j, "Mp", file.string());
  p.Bp = require_number(j, "Bp", file.string());
  p.Ms = require_number(j, "Ms", file.string());
  p.Bs = require_number(j, "Bs", file.string());
  p.Mi = require_number(j, "Mi", file.string());
  p.Bi = require_number(j, "Bi", file.string());
  p.validate();
  return p;
}

void write_twb_params(const TwinBeamParams& params, const std::filesystem::path& file) {
  json j{{"Mp", params.Mp}, {"Bp", params.Bp}, {"Ms", params.Ms},
         {"Bs", params.Bs}, {"Mi", params.Mi}, {"Bi", params.Bi}};
  save_text(file, j.dump(2) + "\n");
}

DetectorPair read_detectors(const std::filesystem::path& file) {
  const json j = load_json(file);
  if (!j.contains("signal") || !j.contains("idler")) {
    throw ParameterDomainError(file.string() + ": expected keys 'signal' and 'idler'");
  }
  DetectorPair pair;
  pair.signal = parse_detector(j["signal"], file.string() + ":signal");
  pair.idler = parse_detector(j["idler"], file.string() + ":idler");
  return pair;
}

DetectorSpec read_single_detector(const std::filesystem::path& file, const std::string& role) {
  const json j = load_json(file);
  if (j.contains(role)) return parse_detector(j[role], file.string() + ":" + role);
  return parse_detector(j, file.string());
}

JointHistogram read_joint_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ParameterDomainError("cannot open " + file.string());
  std::string line;
  if (!std::getline(in, line)) throw ParameterDomainError(file.string() + ": empty joint histogram file");
  JointHistogram joint(0, 0);
  long long rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string a, b, c;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c)) {
      throw ParameterDomainError(file.string() + ": expected 'cs,ci,count' rows");
    }
    const int cs = std::stoi(a);
    const int ci = std::stoi(b);
    const long long count = std::stoll(c);
    if (count < 0) throw ParameterDomainError(file.string() + ": negative count");
    if (count > 0) joint.add(cs, ci, count);
    ++rows;
  }
  if (rows == 0) return JointHistogram(0, 0);
  return joint;
}

void write_joint_csv(const JointHistogram& joint, const std::filesystem::path& file) {
  std::ostringstream out;
  out << "cs,ci,count\n";
  for (int cs = 0; cs <= joint.cs_max(); ++cs) {
    for (int ci = 0; ci <= joint.ci_max(); ++ci) {
      if (joint(cs, ci) != 0) out << cs << ',' << ci << ',' << joint(cs, ci) << '\n';
    }
  }
  save_text(file, out.str());
}

CountDistribution read_distribution_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ParameterDomainError("cannot open " + file.string());
  std::string line;
  if (!std::getline(in, line)) throw ParameterDomainError(file.string() + ": empty distribution file");
  std::vector<double> p;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string a, b;
    if (!std::getline(row, a, ',') || !std::getline(row, b)) {
      throw ParameterDomainError(file.string() + ": expected 'n,p' rows");
    }
    const int n = std::stoi(a);
    if (n != static_cast<int>(p.size())) {
      throw ParameterDomainError(file.string() + ": rows must enumerate n = 0,1,2,...");
    }
    p.push_back(std::stod(b));
  }
  return CountDistribution(std::move(p));
}

void write_distribution_csv(const CountDistribution& dist, const std::filesystem::path& file,
                            const std::string& abscissa, const std::string& value) {
  std::ostringstream out;
  out << abscissa << ',' << value << '\n';
  out << std::setprecision(17);
  for (int n = 0; n < dist.size(); ++n) out << n << ',' << dist[n] << '\n';
  save_text(file, out.str());
}

void write_grid_csv(std::span<const double> x, std::span<const double> y,
                    const std::filesystem::path& file, const std::string& xname,
                    const std::string& yname) {
  if (x.size() != y.size()) throw DimensionError("write_grid_csv: size mismatch");
  std::ostringstream out;
  out << xname << ',' << yname << '\n';
  out << std::setprecision(17);
  for (std::size_t i = 0; i < x.size(); ++i) out << x[i] << ',' << y[i] << '\n';
  save_text(file, out.str());
}

std::string criteria_report_json(const CriteriaReport& report) {
  json families = json::object();
  for (const auto& e : report.entries) {
    json entry{{"k", e.k}, {"value", e.value}, {"verdict", to_string(e.verdict)}};
    if (e.std_error.has_value()) entry["std_error"] = *e.std_error;
    if (e.family == "I") {
      entry["tau"] = e.tau;
      if (e.tau_err > 0.0) entry["tau_err"] = e.tau_err;
      if (e.multiple_roots) entry["multiple_roots"] = true;
    }
    if (!e.note.empty()) entry["note"] = e.note;
    families[e.family].push_back(entry);
  }
  json j{{"k_max", report.k_max}, {"mean", report.mean}, {"fano", report.fano},
         {"families", families}};
  return j.dump(2);
}

void write_criteria_csv(const CriteriaReport& report, std::ostream& out) {
  out << "family,k,value,err,verdict\n";
  out << std::setprecision(12);
  for (const auto& e : report.entries) {
    out << e.family << ',' << e.k << ',' << e.value << ',';
    if (e.std_error.has_value()) out << *e.std_error;
    out << ',' << to_string(e.verdict) << '\n';
  }
}

Manifest::Manifest(std::string command, std::vector<std::string> argv)
    : command_(std::move(command)), argv_(std::move(argv)) {}

void Manifest::set_seed(std::uint64_t seed) { seed_ = seed; }

void Manifest::add_input(const std::string& role, const std::filesystem::path& path) {
  inputs_.emplace_back(role, path.string());
}

void Manifest::add_output(const std::filesystem::path& path) {
  outputs_.push_back(path.string());
}

void Manifest::add_note(const std::string& key, const std::string& value) {
  notes_.emplace_back(key, value);
}

void Manifest::write(const std::filesystem::path& file) const {
  for (const auto& out : outputs_) {
    if (!std::filesystem::exists(out)) {
      throw Error("manifest lists missing output " + out);
    }
  }
  json j;
  j["command"] = command_;
  j["argv"] = argv_;
  j["version"] = "0.1.0";
  if (seed_.has_value()) j["seed"] = *seed_;
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::ostringstream stamp;
  stamp << std::put_time(std::gmtime(&t), "%FT%TZ");
  j["timestamp"] = stamp.str();
  json inputs = json::object();
  for (const auto& [role, path] : inputs_) inputs[role] = path;
  j["inputs"] = inputs;
  j["outputs"] = outputs_;
  json notes = json::object();
  // Conventions picked by the implementation; recorded with every run.
  notes["quasi_laguerre_argument"] = "positive (+W/<W>_s); makes the declination integrate to 0";
  notes["s_ordering_noise"] = "same-mode thermal superposition, mu = (1-s)/2";
  notes["s_moment_prefactor"] = "k! ((1-s)/2)^k";
  for (const auto& [key, value] : notes_) notes[key] = value;
  j["notes"] = notes;
  save_text(file, j.dump(2) + "\n");
}

}  // namespace subpoisson::io
