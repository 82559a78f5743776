#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "metasrl/cmdp.hpp"
#include "metasrl/error.hpp"

namespace metasrl {
namespace {

using nlohmann::json;

void put(std::string& out, double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  out += buf;
}

void put_row(std::string& out, const Eigen::Ref<const Eigen::RowVectorXd>& row) {
  out += '[';
  for (Eigen::Index j = 0; j < row.size(); ++j) {
    if (j) out += ',';
    put(out, row(j));
  }
  out += ']';
}

void put_table(std::string& out, const Matrix& m) {
  out += '[';
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    if (r) out += ',';
    put_row(out, m.row(r));
  }
  out += ']';
}

Matrix read_table(const json& j, std::size_t rows, std::size_t cols, const char* name) {
  if (!j.is_array() || j.size() != rows) throw InvalidInput(std::string(name) + ": bad shape");
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const json& row = j[r];
    if (!row.is_array() || row.size() != cols) throw InvalidInput(std::string(name) + ": bad shape");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c].get<double>();
  }
  return m;
}

}  // namespace

std::string to_json(const TabularCmdp& cmdp) {
  const std::size_t ns = cmdp.n_states();
  const std::size_t na = cmdp.n_actions();
  std::string out = "{\n";
  out += "  \"n_states\": " + std::to_string(ns) + ",\n";
  out += "  \"n_actions\": " + std::to_string(na) + ",\n";
  out += "  \"discount\": ";
  put(out, cmdp.discount());
  out += ",\n  \"c_max\": ";
  put(out, cmdp.c_max());
  out += ",\n  \"initial_dist\": ";
  put_row(out, cmdp.initial_dist().transpose());
  out += ",\n  \"transition\": [";
  for (std::size_t s = 0; s < ns; ++s) {
    out += s ? ",\n    " : "\n    ";
    put_table(out, cmdp.transition().middleRows(static_cast<Eigen::Index>(s * na),
                                                static_cast<Eigen::Index>(na)));
  }
  out += "\n  ],\n  \"reward\": ";
  put_table(out, cmdp.reward());
  out += ",\n  \"costs\": [";
  for (std::size_t i = 0; i < cmdp.costs().size(); ++i) {
    out += i ? ",\n    " : "\n    ";
    put_table(out, cmdp.costs()[i]);
  }
  out += cmdp.costs().empty() ? "],\n" : "\n  ],\n";
  out += "  \"limits\": [";
  for (std::size_t i = 0; i < cmdp.limits().size(); ++i) {
    if (i) out += ',';
    put(out, cmdp.limits()[i]);
  }
  out += "]\n}\n";
  return out;
}

TabularCmdp cmdp_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("cmdp json: ") + e.what());
  }
  try {
    const auto ns = doc.at("n_states").get<std::size_t>();
    const auto na = doc.at("n_actions").get<std::size_t>();
    const json& tr = doc.at("transition");
    if (!tr.is_array() || tr.size() != ns) throw InvalidInput("transition: bad shape");
    Matrix transition(static_cast<Eigen::Index>(ns * na), static_cast<Eigen::Index>(ns));
    for (std::size_t s = 0; s < ns; ++s)
      transition.middleRows(static_cast<Eigen::Index>(s * na), static_cast<Eigen::Index>(na)) =
          read_table(tr[s], na, ns, "transition");
    std::vector<Matrix> costs;
    for (const json& c : doc.at("costs")) costs.push_back(read_table(c, ns, na, "costs"));
    const auto rho = doc.at("initial_dist").get<std::vector<double>>();
    return TabularCmdp(ns, na, std::move(transition), read_table(doc.at("reward"), ns, na, "reward"),
                       std::move(costs), doc.at("limits").get<std::vector<double>>(),
                       doc.at("discount").get<double>(),
                       Eigen::Map<const Vector>(rho.data(), static_cast<Eigen::Index>(rho.size())),
                       doc.at("c_max").get<double>());
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("cmdp json: ") + e.what());
  }
}

void save_cmdp(const TabularCmdp& cmdp, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << to_json(cmdp);
  if (!out) throw IoError("write failed: " + path);
}

TabularCmdp load_cmdp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return cmdp_from_json(buf.str());
  } catch (const InvalidInput& e) {
    throw InvalidInput(path + ": " + e.what());
  }
}

}  // namespace metasrl
