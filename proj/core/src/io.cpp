#include "scalelaw/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <sstream>
#include <system_error>

#include "scalelaw/error.hpp"

namespace scalelaw {

using nlohmann::json;

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::kParse, "line " + std::to_string(line) + ": " + what);
}

double parse_number(std::string_view field, std::size_t line, std::string_view column) {
  double value = 0.0;
  const auto* begin = field.data();
  const auto* end = field.data() + field.size();
  const auto res = std::from_chars(begin, end, value);
  if (field.empty() || res.ec != std::errc() || res.ptr != end)
    parse_error(line, "cannot parse '" + std::string(field) + "' in column " + std::string(column));
  return value;
}

json params_json(const ChinchillaParams& p) {
  return json{{"A", p.A}, {"alpha", p.alpha}, {"B", p.B}, {"beta", p.beta}, {"E", p.E}};
}

json params_json(const InfoResolutionParams& p) {
  json j = params_json(p.base);
  j["nu"] = p.nu;
  j["mu"] = p.mu;
  j["kappa"] = p.kappa;
  return j;
}

json diagnostic_json(const DiagnosticValue& v) {
  return std::visit([](const auto& x) { return json(x); }, v);
}

double required_number(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::kParse, std::string("params file is missing key '") + key + "'");
  if (!j[key].is_number())
    throw Error(ErrorCode::kParse, std::string("params key '") + key + "' must be a number");
  return j[key].get<double>();
}

std::optional<double> optional_number(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return required_number(j, key);
}

}  // namespace

std::vector<RunRecord> read_runs_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) view.remove_prefix(3);
    if (trim(view).empty()) continue;
    for (auto f : split_commas(view)) header.emplace_back(f);
    break;
  }
  if (header.empty()) throw Error(ErrorCode::kParse, "runs file is empty (no header)");

  auto column = [&](std::string_view name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto col_n = column("n_params");
  const auto col_d = column("n_tokens");
  const auto col_rho = column("rho");
  const auto col_loss = column("loss");
  for (auto [col, name] : {std::pair{col_n, "n_params"}, std::pair{col_d, "n_tokens"},
                           std::pair{col_loss, "loss"}})
    if (!col) throw Error(ErrorCode::kParse, std::string("runs file header is missing column '") + name + "'");

  std::vector<RunRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_commas(line);
    if (fields.size() != header.size())
      parse_error(line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                               std::to_string(fields.size()));
    RunRecord r;
    r.n_params = parse_number(fields[*col_n], line_no, "n_params");
    r.n_data = parse_number(fields[*col_d], line_no, "n_tokens");
    r.rho = col_rho ? parse_number(fields[*col_rho], line_no, "rho") : 1.0;
    r.loss = parse_number(fields[*col_loss], line_no, "loss");
    try {
      validate(r);
    } catch (const Error& e) {
      parse_error(line_no, e.what());
    }
    records.push_back(r);
  }
  return records;
}

std::vector<RunRecord> read_runs_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open runs file " + path.string());
  try {
    return read_runs_csv(in);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_runs_csv(std::ostream& out, std::span<const RunRecord> records) {
  out << "n_params,n_tokens,rho,loss\n";
  for (const auto& r : records)
    out << format_double(r.n_params) << ',' << format_double(r.n_data) << ','
        << format_double(r.rho) << ',' << format_double(r.loss) << '\n';
}

DataRange data_range(std::span<const RunRecord> records) {
  if (records.empty()) throw Error(ErrorCode::kInsufficientData, "no records");
  DataRange r{records[0].n_params, records[0].n_params, records[0].n_data, records[0].n_data};
  for (const auto& rec : records) {
    r.n_min = std::min(r.n_min, rec.n_params);
    r.n_max = std::max(r.n_max, rec.n_params);
    r.d_min = std::min(r.d_min, rec.n_data);
    r.d_max = std::max(r.d_max, rec.n_data);
  }
  return r;
}

InfoResolutionParams ParamsDocument::inforesolution() const {
  std::vector<std::string> missing;
  if (!nu) missing.emplace_back("nu");
  if (!mu) missing.emplace_back("mu");
  if (!kappa) missing.emplace_back("kappa");
  if (!missing.empty()) {
    std::string msg = "params file is missing information-resolution keys:";
    for (const auto& k : missing) msg += " " + k;
    throw Error(ErrorCode::kParse, msg);
  }
  InfoResolutionParams p;
  p.base = base;
  p.nu = *nu;
  p.mu = *mu;
  p.kappa = *kappa;
  return p;
}

ParamsDocument ParamsDocument::from(const InfoResolutionParams& p) {
  ParamsDocument d;
  d.base = p.base;
  d.nu = p.nu;
  d.mu = p.mu;
  d.kappa = p.kappa;
  return d;
}

ParamsDocument ParamsDocument::from(const ChinchillaParams& p) {
  ParamsDocument d;
  d.base = p;
  return d;
}

std::string params_to_json(const ParamsDocument& doc) {
  json j = params_json(doc.base);
  if (doc.nu) j["nu"] = *doc.nu;
  if (doc.mu) j["mu"] = *doc.mu;
  if (doc.kappa) j["kappa"] = *doc.kappa;
  json meta = json::object();
  const auto& m = doc.metadata;
  if (m.fit_objective) meta["fit_objective"] = *m.fit_objective;
  if (m.n_points) meta["n_points"] = *m.n_points;
  if (m.converged) meta["converged"] = *m.converged;
  meta["tool_version"] = m.tool_version;
  meta["config_digest"] = m.config_digest;
  if (m.data_range)
    meta["data_range"] = {{"n_min", m.data_range->n_min},
                          {"n_max", m.data_range->n_max},
                          {"d_min", m.data_range->d_min},
                          {"d_max", m.data_range->d_max}};
  j["metadata"] = std::move(meta);
  return j.dump(2) + "\n";
}

ParamsDocument params_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kParse, std::string("params file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kParse, "params file must hold a JSON object");

  ParamsDocument doc;
  doc.base = {required_number(j, "A"), required_number(j, "alpha"), required_number(j, "B"),
              required_number(j, "beta"), required_number(j, "E")};
  doc.nu = optional_number(j, "nu");
  doc.mu = optional_number(j, "mu");
  doc.kappa = optional_number(j, "kappa");
  if (j.contains("metadata") && j["metadata"].is_object()) {
    const json& m = j["metadata"];
    doc.metadata.fit_objective = optional_number(m, "fit_objective");
    if (m.contains("n_points") && m["n_points"].is_number_unsigned())
      doc.metadata.n_points = m["n_points"].get<std::uint64_t>();
    if (m.contains("converged") && m["converged"].is_boolean())
      doc.metadata.converged = m["converged"].get<bool>();
    if (m.contains("tool_version") && m["tool_version"].is_string())
      doc.metadata.tool_version = m["tool_version"].get<std::string>();
    if (m.contains("config_digest") && m["config_digest"].is_string())
      doc.metadata.config_digest = m["config_digest"].get<std::string>();
    if (m.contains("data_range") && m["data_range"].is_object()) {
      const json& r = m["data_range"];
      doc.metadata.data_range = DataRange{required_number(r, "n_min"), required_number(r, "n_max"),
                                          required_number(r, "d_min"), required_number(r, "d_max")};
    }
  }
  try {
    validate(doc.base);
    if (doc.has_resolution_terms()) validate(doc.inforesolution());
  } catch (const Error& e) {
    throw Error(ErrorCode::kDomain, std::string("params file: ") + e.what());
  }
  return doc;
}

ParamsDocument read_params_file(const std::filesystem::path& path) {
  try {
    return params_from_json(read_text_file(path));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::string report_to_json(const TransferReport& r) {
  json surface = json::array();
  for (const auto& p : r.predicted_surface)
    surface.push_back({{"n_params", p.n_params}, {"n_tokens", p.n_data}, {"loss", p.loss}});
  json j{
      {"source_params", params_json(r.source_params)},
      {"rho_target", r.rho_target},
      {"rho_source", r.rho_source},
      {"derived",
       {{"variance_inflation", r.variance_inflation},
        {"b_eff", r.b_eff},
        {"loss_shift", r.loss_shift},
        {"loss_floor", r.loss_floor}}},
      {"effective_params", params_json(r.effective_params)},
      {"beta_t", r.effective_params.beta},
      {"E_t", r.effective_params.E},
      {"refit_residual", r.refit_residual},
      {"converged", r.converged},
      {"predicted_surface", std::move(surface)},
      {"diagnostics", r.diagnostics},
      {"tool_version", kToolVersion},
  };
  if (r.rho_estimate) j["rho_estimate"] = json::parse(estimate_to_json(*r.rho_estimate));
  if (r.source_fit) {
    j["source_fit"] = {{"objective", r.source_fit->objective},
                       {"n_points", r.source_fit->n_points},
                       {"converged", r.source_fit->converged}};
  }
  return j.dump(2) + "\n";
}

std::string estimate_to_json(const RhoEstimate& e, bool entropies_in_bits) {
  json diags = json::object();
  for (const auto& d : e.diagnostics) {
    constexpr std::string_view kNats = "_nats";
    if (entropies_in_bits && d.key.ends_with(kNats) && std::holds_alternative<double>(d.value)) {
      const std::string key = d.key.substr(0, d.key.size() - kNats.size()) + "_bits";
      diags[key] = std::get<double>(d.value) / std::numbers::ln2;
    } else {
      diags[d.key] = diagnostic_json(d.value);
    }
  }
  json j{{"rho", e.rho}, {"estimator", e.estimator}, {"diagnostics", std::move(diags)}};
  return j.dump();
}

std::string config_digest(const FitConfig& c) {
  std::ostringstream canon;
  canon << "delta=" << format_double(c.huber_delta) << ";iters=" << c.max_iters
        << ";tol=" << format_double(c.rel_tol)
        << ";pin_mu=" << (c.pin_mu ? format_double(*c.pin_mu) : "none")
        << ";pin_alpha=" << (c.pin_alpha ? format_double(*c.pin_alpha) : "none")
        << ";stage=" << (c.stage_mode == StageMode::kStaged ? "staged" : "joint")
        << ";polish=" << c.joint_polish << ";seeds=";
  for (const auto& s : c.init_grid)
    canon << format_double(s.log_a) << ',' << format_double(s.alpha) << ','
          << format_double(s.log_b) << ',' << format_double(s.beta) << ',' << format_double(s.e)
          << ',' << s.e_relative << ',' << format_double(s.nu) << ',' << format_double(s.mu) << ','
          << format_double(s.log_kappa) << '|';
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canon.str()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::kIo, "error writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error(ErrorCode::kIo, "cannot move output into place at " + path.string());
  }
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace scalelaw
