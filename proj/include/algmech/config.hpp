#pragma once

// JSON model descriptions. Expressions travel as strings in the grammar of
// algmech/expr.hpp; everything else is plain numbers.

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "algmech/hj.hpp"

namespace algmech {

using ojson = nlohmann::ordered_json;

struct SectionStrings {
  std::string name;
  std::vector<std::string> gamma;
  std::vector<std::string> gammabar;
};

struct ModelConfig {
  std::string name;
  std::string doc;
  int m = 0, n = 1, r = 1;
  std::vector<std::pair<std::string, double>> parameters;
  std::vector<std::vector<std::string>> anchor;     // m x n
  std::vector<std::vector<std::string>> structure;  // n x n(n-1)/2, pairs (1,2),(1,3),..,(2,3),..
  std::string lagrangian;
  bool adapted = true;                              // subbundle "adapted:r"
  std::vector<std::vector<std::string>> subbundle;  // n x r when not adapted
  std::vector<std::pair<double, double>> box;       // m intervals
  std::vector<SectionStrings> hj_sections;
  std::vector<double> x0, y0;
};

namespace detail {

inline const ojson& require(const ojson& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("config is missing '") + key + "'");
  return j.at(key);
}

inline std::vector<std::vector<std::string>> string_matrix(const ojson& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array of arrays of strings");
  std::vector<std::vector<std::string>> out;
  for (const auto& row : j) {
    if (!row.is_array()) throw ConfigError(std::string(what) + " must be an array of arrays of strings");
    std::vector<std::string> r;
    for (const auto& e : row) {
      if (e.is_string())
        r.push_back(e.get<std::string>());
      else if (e.is_number())
        r.push_back(expr::format_number(e.get<double>()));
      else
        throw ConfigError(std::string(what) + " entries must be expression strings");
    }
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<double> number_list(const ojson& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& e : j) {
    if (!e.is_number()) throw ConfigError(std::string(what) + " must be an array of numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

inline std::vector<std::string> string_list(const ojson& j, const char* what) {
  if (!j.is_array()) throw ConfigError(std::string(what) + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& e : j) {
    if (!e.is_string()) throw ConfigError(std::string(what) + " must be an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

inline void check_shape(const std::vector<std::vector<std::string>>& M, int rows, int cols, const char* what) {
  if (static_cast<int>(M.size()) != rows) throw ConfigError(std::string(what) + " has the wrong number of rows");
  for (const auto& row : M)
    if (static_cast<int>(row.size()) != cols) throw ConfigError(std::string(what) + " has a row of the wrong length");
}

}  // namespace detail

inline ModelConfig config_from_json(const ojson& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ModelConfig c;
  c.name = j.value("name", std::string("custom"));
  c.doc = j.value("doc", std::string());
  auto dim = [&](const char* key) {
    const auto& v = detail::require(j, key);
    if (!v.is_number_integer()) throw ConfigError(std::string(key) + " must be an integer");
    return v.get<int>();
  };
  c.m = dim("m");
  c.n = dim("n");
  if (c.m < 0 || c.n < 1) throw ConfigError("dimensions must satisfy m >= 0, n >= 1");
  if (j.contains("parameters")) {
    if (!j.at("parameters").is_object()) throw ConfigError("parameters must be an object");
    for (const auto& [k, v] : j.at("parameters").items()) {
      if (!v.is_number()) throw ConfigError("parameter '" + k + "' must be a number");
      c.parameters.emplace_back(k, v.get<double>());
    }
  }
  c.anchor = detail::string_matrix(detail::require(j, "anchor"), "anchor");
  if (c.m == 0 && c.anchor.empty()) c.anchor = {};
  detail::check_shape(c.anchor, c.m, c.n, "anchor");
  const int np = LieAlgebroid::pairs(c.n);
  if (j.contains("structure")) {
    c.structure = detail::string_matrix(j.at("structure"), "structure");
    detail::check_shape(c.structure, c.n, np, "structure");
  } else {
    c.structure.assign(c.n, std::vector<std::string>(np, "0"));
  }
  const auto& lag = detail::require(j, "lagrangian");
  if (!lag.is_string()) throw ConfigError("lagrangian must be an expression string");
  c.lagrangian = lag.get<std::string>();

  const ojson sub = j.contains("subbundle") ? j.at("subbundle") : ojson("adapted:" + std::to_string(c.n));
  if (sub.is_string()) {
    const auto s = sub.get<std::string>();
    if (s.rfind("adapted:", 0) != 0) throw ConfigError("subbundle string must be 'adapted:r'");
    try {
      std::size_t used = 0;
      c.r = std::stoi(s.substr(8), &used);
      if (used != s.size() - 8) throw ConfigError("");
    } catch (const std::exception&) {
      throw ConfigError("subbundle string must be 'adapted:r'");
    }
    if (c.r < 0 || c.r > c.n) throw ConfigError("adapted subbundle rank must lie in [0, n]");
    c.adapted = true;
  } else {
    c.subbundle = detail::string_matrix(sub, "subbundle");
    if (static_cast<int>(c.subbundle.size()) != c.n) throw ConfigError("subbundle must have n rows");
    c.r = c.subbundle.empty() ? 0 : static_cast<int>(c.subbundle.front().size());
    detail::check_shape(c.subbundle, c.n, c.r, "subbundle");
    c.adapted = false;
  }
  if (j.contains("r") && dim("r") != c.r) throw ConfigError("r does not match the subbundle");

  if (j.contains("box")) {
    const auto& b = j.at("box");
    if (!b.is_array()) throw ConfigError("box must be an array of [lo, hi] pairs");
    for (const auto& iv : b) {
      const auto lohi = detail::number_list(iv, "box interval");
      if (lohi.size() != 2 || !(lohi[0] < lohi[1])) throw ConfigError("box intervals must be [lo, hi] with lo < hi");
      c.box.emplace_back(lohi[0], lohi[1]);
    }
  } else {
    c.box.assign(c.m, {-1.0, 1.0});
  }
  if (static_cast<int>(c.box.size()) != c.m) throw ConfigError("box must have one interval per base coordinate");

  if (j.contains("hj_sections")) {
    const auto& hs = j.at("hj_sections");
    if (!hs.is_object()) throw ConfigError("hj_sections must be an object");
    for (const auto& [k, v] : hs.items()) {
      SectionStrings s{k, detail::string_list(detail::require(v, "gamma"), "gamma"),
                       detail::string_list(detail::require(v, "gammabar"), "gammabar")};
      if (static_cast<int>(s.gamma.size()) != c.n || static_cast<int>(s.gammabar.size()) != c.n)
        throw ConfigError("section '" + k + "' must have n components in gamma and gammabar");
      c.hj_sections.push_back(std::move(s));
    }
  }
  c.x0 = j.contains("x0") ? detail::number_list(j.at("x0"), "x0") : std::vector<double>(c.m, 0.0);
  if (static_cast<int>(c.x0.size()) != c.m) throw ConfigError("x0 must have m entries");
  if (j.contains("y0")) {
    c.y0 = detail::number_list(j.at("y0"), "y0");
    if (static_cast<int>(c.y0.size()) != c.n) throw ConfigError("y0 must have n entries");
  } else {
    c.y0.assign(c.n, 0.0);
  }
  return c;
}

inline ojson config_to_json(const ModelConfig& c) {
  ojson j;
  j["name"] = c.name;
  if (!c.doc.empty()) j["doc"] = c.doc;
  j["m"] = c.m;
  j["n"] = c.n;
  j["r"] = c.r;
  ojson params = ojson::object();
  for (const auto& [k, v] : c.parameters) params[k] = v;
  j["parameters"] = params;
  j["anchor"] = c.anchor.empty() ? ojson::array() : ojson(c.anchor);
  j["structure"] = c.structure;
  j["lagrangian"] = c.lagrangian;
  if (c.adapted)
    j["subbundle"] = "adapted:" + std::to_string(c.r);
  else
    j["subbundle"] = c.subbundle;
  ojson box = ojson::array();
  for (const auto& [lo, hi] : c.box) box.push_back({lo, hi});
  j["box"] = box;
  ojson hs = ojson::object();
  for (const auto& s : c.hj_sections) hs[s.name] = {{"gamma", s.gamma}, {"gammabar", s.gammabar}};
  j["hj_sections"] = hs;
  j["x0"] = c.x0;
  j["y0"] = c.y0;
  return j;
}

/// Everything a config describes, parsed and wired.
struct BuiltModel {
  std::shared_ptr<const LieAlgebroid> algebroid;
  std::shared_ptr<const ImplicitSystem> system;
  std::vector<std::pair<std::string, HJSection>> sections;
};

inline std::vector<std::vector<expr::Expression>> parse_matrix(const std::vector<std::vector<std::string>>& M) {
  std::vector<std::vector<expr::Expression>> out;
  for (const auto& row : M) {
    std::vector<expr::Expression> r;
    for (const auto& s : row) r.push_back(expr::parse(s));
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<expr::Expression> parse_list(const std::vector<std::string>& v) {
  std::vector<expr::Expression> out;
  for (const auto& s : v) out.push_back(expr::parse(s));
  return out;
}

inline BuiltModel build(const ModelConfig& c) {
  expr::Binding params;
  for (const auto& [k, v] : c.parameters) params[k] = v;
  auto A = std::make_shared<const LieAlgebroid>(c.m, c.n, parse_matrix(c.anchor), parse_matrix(c.structure), params);
  Lagrangian L(A, expr::parse(c.lagrangian));
  Subbundle U = c.adapted ? Subbundle::adapted(A->layout(), c.r)
                          : Subbundle(A->layout(), c.r, parse_matrix(c.subbundle), false, params);
  BuiltModel b;
  b.algebroid = A;
  b.system = std::make_shared<const ImplicitSystem>(std::move(L), std::move(U));
  for (const auto& s : c.hj_sections) {
    HJSection sec{parse_list(s.gamma), parse_list(s.gammabar)};
    CompiledSection check(*b.system, sec);  // rejects unknown variables up front
    b.sections.emplace_back(s.name, std::move(sec));
  }
  return b;
}

}  // namespace algmech
