#include <json.hpp>

#include <algorithm>
#include <string>

#include "lossdev/model.hpp"

namespace lossdev {

namespace {

using nlohmann::json;

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

[[noreturn]] void fail(const std::string& field, const std::string& what) { throw ParseError(field, 0, what); }

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(path + "/" + key, "missing field");
  return *it;
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

std::uint64_t positive_integer(const json& v, const std::string& path, bool allow_zero = false) {
  if (!v.is_number_integer() && !v.is_number_unsigned()) fail(path, "expected an integer");
  if (v.is_number_integer() && v.get<std::int64_t>() < (allow_zero ? 0 : 1)) {
    fail(path, allow_zero ? "expected a nonnegative integer" : "expected a positive integer");
  }
  return v.get<std::uint64_t>();
}

std::vector<double> numbers(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t j = 0; j < v.size(); ++j) out.push_back(number(v[j], path + "/" + std::to_string(j)));
  return out;
}

LossClass parse_class(const json& v, const std::string& path) {
  const json& name = require(v, "name", path);
  if (!name.is_string()) fail(path + "/name", "expected a string");
  auto support = numbers(require(v, "support", path), path + "/support");
  auto probs = numbers(require(v, "probs", path), path + "/probs");
  bool center = false;
  if (auto it = v.find("center"); it != v.end()) {
    if (!it->is_boolean()) fail(path + "/center", "expected true or false");
    center = it->get<bool>();
  }
  try {
    return LossClass::make(name.get<std::string>(), std::move(support), std::move(probs), center);
  } catch (const ParseError&) {
    throw;
  } catch (const ModelError& e) {
    fail(path, e.what());
  }
}

AssignmentRule parse_rule(const json& v, const std::string& path) {
  if (!v.is_object() || v.size() != 1) fail(path, "expected exactly one of 'round_robin' or 'blocks'");
  try {
    if (auto it = v.find("round_robin"); it != v.end()) {
      const std::string p = path + "/round_robin";
      const json& w = require(*it, "weights", p);
      if (!w.is_array()) fail(p + "/weights", "expected an array of integers");
      std::vector<std::uint64_t> weights;
      for (std::size_t j = 0; j < w.size(); ++j) {
        weights.push_back(positive_integer(w[j], p + "/weights/" + std::to_string(j), true));
      }
      return AssignmentRule::round_robin(std::move(weights));
    }
    if (auto it = v.find("blocks"); it != v.end()) {
      const std::string p = path + "/blocks";
      const auto a0 = positive_integer(require(*it, "a0", p), p + "/a0");
      const auto growth = positive_integer(require(*it, "growth", p), p + "/growth");
      const json& order = require(*it, "order", p);
      if (!order.is_array()) fail(p + "/order", "expected an array of class numbers");
      std::vector<std::size_t> classes;
      for (std::size_t j = 0; j < order.size(); ++j) {
        // Class numbers are 1-based in the file.
        classes.push_back(positive_integer(order[j], p + "/order/" + std::to_string(j)) - 1);
      }
      return AssignmentRule::blocks(a0, growth, std::move(classes));
    }
  } catch (const ParseError&) {
    throw;
  } catch (const ModelError& e) {
    fail(path, e.what());
  }
  fail(path, "expected exactly one of 'round_robin' or 'blocks'");
}

}  // namespace

ParseError::ParseError(const std::string& field, std::size_t line, const std::string& what)
    : ModelError((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                 (field.empty() ? std::string() : field + ": ") + what),
      field_(field),
      line_(line) {}

ValidationError::ValidationError(Violation violation)
    : ModelError("class '" + violation.class_name + "' violates " + clause_name(violation.clause) + ": " +
                 violation.message),
      violation_(std::move(violation)) {}

LoadedModel parse_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("", line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0), e.what());
  }
  if (!doc.is_object()) fail("", "expected a JSON object at top level");

  const json& b = require(doc, "bounds", "");
  AssumptionBounds bounds;
  try {
    bounds = AssumptionBounds::make(number(require(b, "c0", "/bounds"), "/bounds/c0"),
                                    number(require(b, "c1", "/bounds"), "/bounds/c1"));
  } catch (const ParseError&) {
    throw;
  } catch (const ModelError& e) {
    fail("/bounds", e.what());
  }

  const json& cls = require(doc, "classes", "");
  if (!cls.is_array() || cls.empty()) fail("/classes", "expected a nonempty array");
  std::vector<LossClass> classes;
  for (std::size_t i = 0; i < cls.size(); ++i) classes.push_back(parse_class(cls[i], "/classes/" + std::to_string(i)));

  const json& regime = require(doc, "regime", "");
  if (!regime.is_object() || regime.size() != 1) fail("/regime", "expected exactly one of 'weighted' or 'assigned'");
  try {
    if (auto it = regime.find("weighted"); it != regime.end()) {
      auto weights = numbers(require(*it, "weights", "/regime/weighted"), "/regime/weighted/weights");
      return LoadedModel{PortfolioModel::weighted(std::move(classes), std::move(weights)), bounds};
    }
    if (auto it = regime.find("assigned"); it != regime.end()) {
      auto rule = parse_rule(*it, "/regime/assigned");
      return LoadedModel{PortfolioModel::assigned(std::move(classes), std::move(rule)), bounds};
    }
  } catch (const ParseError&) {
    throw;
  } catch (const ModelError& e) {
    fail("/regime", e.what());
  }
  fail("/regime", "expected exactly one of 'weighted' or 'assigned'");
}

LoadedModel load_model(const std::string& text) {
  auto loaded = parse_model(text);
  auto violations = validate_model(loaded.model, loaded.bounds);
  if (!violations.empty()) throw ValidationError(std::move(violations.front()));
  return loaded;
}

}  // namespace lossdev
