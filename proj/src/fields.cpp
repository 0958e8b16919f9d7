#include "hjn/fields.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace hjn {

namespace {

struct KindInfo {
  ScalarField::Kind kind;
  const char* name;
  std::size_t min_params;
  std::size_t max_params;
};

constexpr KindInfo kKinds[] = {
    {ScalarField::Kind::Zero, "zero", 0, 0},
    {ScalarField::Kind::Constant, "constant", 1, 1},
    {ScalarField::Kind::Well, "well", 1, 3},
    {ScalarField::Kind::Sine, "sine", 1, 2},
    {ScalarField::Kind::Cosine, "cosine", 1, 2},
    {ScalarField::Kind::Abs, "abs", 1, 2},
    {ScalarField::Kind::Linear, "linear", 1, 3},
    {ScalarField::Kind::Tent, "tent", 4, 4},
};

const KindInfo& info(ScalarField::Kind kind) {
  for (const auto& k : kKinds) {
    if (k.kind == kind) return k;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown scalar field kind");
}

// Fills defaults so evaluation never has to branch on arity.
std::vector<double> normalized(ScalarField::Kind kind, std::vector<double> p) {
  using K = ScalarField::Kind;
  switch (kind) {
    case K::Well:
      if (p.size() < 2) p.push_back(0.0);
      if (p.size() < 3) p.push_back(1.0);
      break;
    case K::Sine:
    case K::Cosine:
      if (p.size() < 2) p.push_back(1.0);
      break;
    case K::Abs:
      if (p.size() < 2) p.push_back(0.0);
      break;
    case K::Linear:
      while (p.size() < 3) p.push_back(0.0);
      break;
    default:
      break;
  }
  return p;
}

}  // namespace

ScalarField::ScalarField(Kind kind, std::vector<double> params) : kind_(kind) {
  const auto& k = info(kind);
  if (params.size() < k.min_params || params.size() > k.max_params) {
    throw Error(ErrorCode::InvalidArgument,
                std::string("wrong number of parameters for '") + k.name + "'");
  }
  params_ = normalized(kind, std::move(params));
}

ScalarField ScalarField::parse(const std::string& text) {
  std::istringstream in(text);
  std::string name;
  in >> name;
  std::vector<double> params;
  std::string tok;
  while (in >> tok) {
    try {
      std::size_t used = 0;
      params.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ConfigError, "non-numeric parameter '" + tok + "' in '" + text + "'");
    }
  }
  for (const auto& k : kKinds) {
    if (name == k.name) {
      if (params.size() < k.min_params || params.size() > k.max_params) {
        throw Error(ErrorCode::ConfigError,
                    "function '" + name + "' takes " + std::to_string(k.min_params) + ".." +
                        std::to_string(k.max_params) + " parameters");
      }
      return ScalarField(k.kind, std::move(params));
    }
  }
  throw Error(ErrorCode::ConfigError, "unknown function identifier '" + name + "'");
}

double ScalarField::operator()(Vec x) const {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const auto& p = params_;
  switch (kind_) {
    case Kind::Zero:
      return 0.0;
    case Kind::Constant:
      return p[0];
    case Kind::Well: {
      const Vec d = x - Vec{p[0], p[1]};
      return p[2] * dot(d, d);
    }
    case Kind::Sine:
      return p[1] * std::sin(two_pi * p[0] * x.x);
    case Kind::Cosine:
      return p[1] * std::cos(two_pi * p[0] * x.x) * std::cos(two_pi * p[0] * x.y);
    case Kind::Abs:
      return norm(x - Vec{p[0], p[1]});
    case Kind::Linear:
      return p[0] * x.x + p[1] * x.y + p[2];
    case Kind::Tent:
      return std::max(p[2] - p[3] * norm(x - Vec{p[0], p[1]}), 0.0);
  }
  return 0.0;
}

std::string ScalarField::describe() const {
  std::ostringstream out;
  out << info(kind_).name;
  out.precision(17);
  for (double v : params_) out << ' ' << v;
  return out.str();
}

}  // namespace hjn
