#include "sogpe/quadrature.hpp"

#include <stdexcept>
#include <string>

namespace sogpe {

namespace {

// Expands the symmetry orbits of a fully symmetric rule.
class RuleBuilder {
 public:
  explicit RuleBuilder(int degree) { rule_.degree = degree; }

  RuleBuilder& centroid(double w) {
    rule_.points.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
    rule_.weights.push_back(w);
    return *this;
  }
  // (a, b, b) and permutations, a + 2b = 1.
  RuleBuilder& orbit3(double w, double a, double b) {
    rule_.points.push_back({a, b, b});
    rule_.points.push_back({b, a, b});
    rule_.points.push_back({b, b, a});
    rule_.weights.insert(rule_.weights.end(), 3, w);
    return *this;
  }
  // (a, b, c) and all six permutations.
  RuleBuilder& orbit6(double w, double a, double b, double c) {
    rule_.points.push_back({a, b, c});
    rule_.points.push_back({a, c, b});
    rule_.points.push_back({b, a, c});
    rule_.points.push_back({b, c, a});
    rule_.points.push_back({c, a, b});
    rule_.points.push_back({c, b, a});
    rule_.weights.insert(rule_.weights.end(), 6, w);
    return *this;
  }
  TriangleRule build() const { return rule_; }

 private:
  TriangleRule rule_;
};

// Dunavant rules.
TriangleRule make_degree2() {
  return RuleBuilder(2).orbit3(1.0 / 3.0, 2.0 / 3.0, 1.0 / 6.0).build();
}

TriangleRule make_degree4() {
  return RuleBuilder(4)
      .orbit3(0.223381589678011, 0.108103018168070, 0.445948490915965)
      .orbit3(0.109951743655322, 0.816847572980459, 0.091576213509771)
      .build();
}

TriangleRule make_degree8() {
  return RuleBuilder(8)
      .centroid(0.144315607677787)
      .orbit3(0.095091634267285, 0.081414823414554, 0.459292588292723)
      .orbit3(0.103217370534718, 0.658861384496480, 0.170569307751760)
      .orbit3(0.032458497623198, 0.898905543365938, 0.050547228317031)
      .orbit6(0.027230314174435, 0.008394777409958, 0.263112829634638, 0.728492392955404)
      .build();
}

}  // namespace

const TriangleRule& triangle_rule(int degree) {
  static const TriangleRule d2 = make_degree2();
  static const TriangleRule d4 = make_degree4();
  static const TriangleRule d8 = make_degree8();
  if (degree <= 2) return d2;
  if (degree <= 4) return d4;
  if (degree <= 8) return d8;
  throw std::invalid_argument("no triangle rule of degree " + std::to_string(degree));
}

}  // namespace sogpe
