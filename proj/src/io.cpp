#include "entsampler/io.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "entsampler/error.hpp"

namespace entsampler {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const std::string& msg) { throw Error(ErrorCode::ParseError, msg); }

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) parse_fail("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double number(const json& j, const char* what) {
  if (!j.is_number()) parse_fail(std::string(what) + " must be a number");
  return j.get<double>();
}

Matrix read_binary_matrix(const std::string& path, std::int64_t dim) {
  std::ifstream in(path, std::ios::binary);
  if (!in) parse_fail("cannot open matrix file '" + path + "'");
  Matrix m(dim, dim);
  std::vector<double> row(2 * dim);
  for (std::int64_t i = 0; i < dim; ++i) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(double)));
    if (!in) parse_fail("matrix file '" + path + "' is too short");
    for (std::int64_t j = 0; j < dim; ++j) m(i, j) = cplx(row[2 * j], row[2 * j + 1]);
  }
  return m;
}

}  // namespace

StateFile parse_state_json(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    parse_fail(std::string("state file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) parse_fail("state file must be a JSON object");
  StateFile s;
  if (!j.contains("subsystems") || !j["subsystems"].is_array() || j["subsystems"].empty()) {
    parse_fail("state file needs a nonempty 'subsystems' array");
  }
  for (const auto& sub : j["subsystems"]) {
    if (!sub.is_object() || !sub.contains("name") || !sub["name"].is_string() || !sub.contains("dims") ||
        !sub["dims"].is_array() || sub["dims"].empty()) {
      parse_fail("each subsystem needs a 'name' string and a nonempty 'dims' array");
    }
    NamedSubsystem ns{sub["name"].get<std::string>(), {}};
    if (ns.name.empty() || ns.name.find_first_of(",|") != std::string::npos) {
      parse_fail("subsystem names must be nonempty and free of ',' and '|'");
    }
    for (const auto& s2 : s.subsystems) {
      if (s2.name == ns.name) parse_fail("duplicate subsystem name '" + ns.name + "'");
    }
    for (const auto& d : sub["dims"]) {
      if (!d.is_number_integer() || d.get<long long>() < 1) parse_fail("dims must be positive integers");
      ns.dims.push_back(d.get<int>());
      s.rho.dims.push_back(d.get<int>());
    }
    s.subsystems.push_back(std::move(ns));
  }
  s.rho.normalized = j.value("normalized", true);
  const std::int64_t dim = total_dim(s.rho.dims);
  if (j.contains("matrix_file")) {
    if (!j["matrix_file"].is_string()) parse_fail("'matrix_file' must be a string");
    const std::filesystem::path p = std::filesystem::path(base_dir) / j["matrix_file"].get<std::string>();
    s.rho.matrix = read_binary_matrix(p.string(), dim);
  } else {
    if (!j.contains("matrix") || !j["matrix"].is_array()) parse_fail("state file needs a 'matrix' array");
    const auto& m = j["matrix"];
    if (static_cast<std::int64_t>(m.size()) != dim * dim) {
      parse_fail("matrix has " + std::to_string(m.size()) + " entries, dims require " + std::to_string(dim * dim));
    }
    s.rho.matrix.resize(dim, dim);
    for (std::int64_t i = 0; i < dim; ++i) {
      for (std::int64_t k = 0; k < dim; ++k) {
        const auto& e = m[i * dim + k];
        if (!e.is_array() || e.size() != 2) parse_fail("matrix entries must be [re, im] pairs");
        s.rho.matrix(i, k) = cplx(number(e[0], "re"), number(e[1], "im"));
      }
    }
  }
  validate(s.rho);
  return s;
}

StateFile read_state_file(const std::string& path) {
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_state_json(slurp(path), dir.empty() ? "." : dir.string());
}

namespace {

json header_json(const StateFile& state) {
  json subs = json::array();
  for (const auto& s : state.subsystems) subs.push_back({{"name", s.name}, {"dims", s.dims}});
  return json{{"subsystems", subs}, {"normalized", state.rho.normalized}};
}

json inline_matrix(const Matrix& m) {
  json arr = json::array();
  for (std::int64_t i = 0; i < m.rows(); ++i) {
    for (std::int64_t k = 0; k < m.cols(); ++k) arr.push_back({m(i, k).real(), m(i, k).imag()});
  }
  return arr;
}

}  // namespace

std::string state_to_json(const StateFile& state) {
  json j = header_json(state);
  j["matrix"] = inline_matrix(state.rho.matrix);
  return j.dump();
}

void write_state_file(const std::string& path, const StateFile& state) {
  json j = header_json(state);
  if (state.rho.dim() > kInlineMatrixDim) {
    const std::filesystem::path p(path);
    const std::string bin_name = p.stem().string() + ".bin";
    const auto bin_path = p.parent_path() / bin_name;
    std::ofstream bin(bin_path, std::ios::binary);
    if (!bin) throw Error(ErrorCode::InvalidArgument, "cannot write '" + bin_path.string() + "'");
    const Matrix& m = state.rho.matrix;
    for (std::int64_t i = 0; i < m.rows(); ++i) {
      for (std::int64_t k = 0; k < m.cols(); ++k) {
        const double re = m(i, k).real(), im = m(i, k).imag();
        bin.write(reinterpret_cast<const char*>(&re), sizeof re);
        bin.write(reinterpret_cast<const char*>(&im), sizeof im);
      }
    }
    j["matrix_file"] = bin_name;
  } else {
    j["matrix"] = inline_matrix(state.rho.matrix);
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
  out << j.dump() << '\n';
}

Bipartition parse_split(const StateFile& state, const std::string& text) {
  const auto bar = text.find('|');
  if (bar == std::string::npos || text.find('|', bar + 1) != std::string::npos) {
    parse_fail("split must look like 'A|E' with exactly one '|'");
  }
  auto indices = [&](const std::string& side) {
    std::vector<int> out;
    std::stringstream ss(side);
    std::string name;
    while (std::getline(ss, name, ',')) {
      if (name.empty()) continue;
      int offset = 0;
      bool found = false;
      for (const auto& s : state.subsystems) {
        if (s.name == name) {
          for (std::size_t i = 0; i < s.dims.size(); ++i) out.push_back(offset + static_cast<int>(i));
          found = true;
        }
        offset += static_cast<int>(s.dims.size());
      }
      if (!found) parse_fail("unknown subsystem '" + name + "' in split");
    }
    return out;
  };
  Bipartition b{indices(text.substr(0, bar)), indices(text.substr(bar + 1))};
  if (b.a.empty()) parse_fail("split needs at least one subsystem left of '|'");
  for (int i : b.a) {
    for (int k : b.b) {
      if (i == k) parse_fail("a subsystem appears on both sides of the split");
    }
  }
  return b;
}

json report_to_json(const VerificationReport& report) {
  json records = json::array();
  for (const auto& r : report.records) {
    records.push_back({{"trial", r.trial},
                       {"seed", r.seed},
                       {"check", r.check},
                       {"params", r.params},
                       {"kind", to_string(r.kind)},
                       {"value", r.value},
                       {"bound", r.bound},
                       {"slack", r.slack},
                       {"tolerance", r.tolerance},
                       {"passed", r.passed}});
  }
  json config;
  try {
    config = report.config.empty() ? json::object() : json::parse(report.config);
  } catch (const json::parse_error&) {
    config = report.config;
  }
  json checks = json::object();
  for (const auto& r : report.records) {
    json& c = checks[r.check];
    if (c.is_null()) c = {{"records", 0}, {"failures", 0}, {"worst_slack", nullptr}};
    c["records"] = c["records"].get<long long>() + 1;
    if (!r.passed) c["failures"] = c["failures"].get<long long>() + 1;
    if (r.kind != CheckKind::Equality && std::isfinite(r.slack) &&
        (c["worst_slack"].is_null() || r.slack < c["worst_slack"].get<double>())) {
      c["worst_slack"] = r.slack;
    }
  }
  json worst = std::isfinite(report.worst_slack) ? json(report.worst_slack) : json(nullptr);
  return json{{"suite", report.suite},
              {"config", config},
              {"records", records},
              {"summary",
               {{"trials", report.trials},
                {"failures", report.failures},
                {"passed", report.passed()},
                {"worst_slack", worst},
                {"worst_equality_error", report.worst_equality_error},
                {"tolerance", report.tolerance},
                {"runtime_seconds", report.runtime_seconds},
                {"checks", checks}}}};
}

}  // namespace entsampler
