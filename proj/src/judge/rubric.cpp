#include <unordered_set>

#include "editfactory/error.hpp"
#include "editfactory/judge.hpp"
#include "editfactory/util.hpp"

namespace editfactory::judge {

namespace {

constexpr std::int64_t kS = Decimal::kScale;

Decimal half(std::int64_t twice) { return Decimal::from_units(twice * kS / 2); }

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

}  // namespace

Decimal completeness_lookup(double coverage, bool all_secondary_covered) {
  if (!(coverage >= 0.0 && coverage <= 1.0)) raise(ErrorCode::kInputOutOfRange, "coverage outside [0,1]");
  int base = 1;
  if (coverage == 1.0) base = 5;
  else if (coverage >= 0.6) base = 4;
  else if (coverage >= 0.2) base = 3;
  else if (coverage > 0.0) base = 2;
  Decimal out = Decimal::from_int(base);
  if (coverage > 0.0 && coverage < 1.0 && all_secondary_covered) out += half(1);
  return out;
}

Decimal completeness_from_hits(Decimal hits, int total, bool all_secondary_covered) {
  if (total <= 0) raise(ErrorCode::kInputOutOfRange, "change count must be positive");
  const Decimal n = Decimal::from_int(total);
  if (hits < Decimal() || hits > n) raise(ErrorCode::kInputOutOfRange, "hits outside [0, N]");
  // Compare K/N against the band edges without leaving integers: K*5 vs N*3 etc.
  const __int128 k5 = static_cast<__int128>(hits.units()) * 5;
  const __int128 n_units = static_cast<__int128>(n.units());
  int base = 1;
  if (hits == n) base = 5;
  else if (k5 >= n_units * 3) base = 4;
  else if (k5 >= n_units) base = 3;
  else if (hits > Decimal()) base = 2;
  Decimal out = Decimal::from_int(base);
  if (hits > Decimal() && hits < n && all_secondary_covered) out += half(1);
  return out;
}

Decimal clarity_ceiling(std::size_t n_hits) {
  switch (n_hits) {
    case 0: return Decimal::from_int(5);
    case 1: return Decimal::from_int(3);
    case 2: return half(5);
    default: return Decimal::from_int(2);
  }
}

bool reports_hallucination(const JudgeVerdict& v) {
  if (v.hallucination) return *v.hallucination;
  static const std::unordered_set<std::string> negators = {"no", "not", "without", "zero", "none", "never", "nor"};
  const std::string text = to_lower_ascii(v.reasoning);
  const std::string_view stem = "hallucinat";
  for (std::size_t p = text.find(stem); p != std::string::npos; p = text.find(stem, p + 1)) {
    if (p > 0 && is_alpha(text[p - 1])) continue;
    // Up to three preceding words.
    bool negated = false;
    std::size_t q = p;
    for (int w = 0; w < 3 && q > 0 && !negated; ++w) {
      while (q > 0 && !is_alpha(text[q - 1])) {
        if (text[q - 1] == '.' || text[q - 1] == ';' || text[q - 1] == '\n') {
          q = 0;
          break;
        }
        --q;
      }
      const std::size_t end = q;
      while (q > 0 && is_alpha(text[q - 1])) --q;
      if (end > q && negators.count(text.substr(q, end - q))) negated = true;
    }
    // "hallucination-free", "hallucinations: none", "hallucination: no".
    std::size_t r = p;
    while (r < text.size() && is_alpha(text[r])) ++r;
    const std::string_view tail = std::string_view(text).substr(r);
    if (tail.rfind("-free", 0) == 0) negated = true;
    const std::string after = trim(tail);
    if (!after.empty() && after[0] == ':') {
      const std::string value = trim(std::string_view(after).substr(1));
      for (const char* neg : {"none", "no", "0", "false", "n/a"}) {
        const std::string_view n(neg);
        if (value.rfind(n, 0) == 0 && (value.size() == n.size() || !is_alpha(value[n.size()]))) negated = true;
      }
    }
    if (!negated) return true;
  }
  return false;
}

ValidatedScore enforce_constraints(Dimension d, const JudgeVerdict& verdict, std::span<const ForbiddenTermHit> hits) {
  ValidatedScore out{verdict.score, {}};
  switch (d) {
    case Dimension::kAccuracy: {
      const Decimal cap = Decimal::from_int(2);
      if (reports_hallucination(verdict) && out.score > cap) {
        out.log.push_back({"hallucination_cap", out.score, cap, "verdict reports a hallucinated change", false});
        out.score = cap;
      }
      break;
    }
    case Dimension::kCompleteness: {
      if (!verdict.hits) break;
      const CoverageHits& h = *verdict.hits;
      const bool valid = h.total > 0 && h.hits >= Decimal() && h.hits <= Decimal::from_int(h.total) &&
                         h.hits.units() % (kS / 2) == 0;
      if (!valid) {
        out.log.push_back({"coverage_counts_invalid", out.score, out.score,
                           "reasoning reports " + h.hits.to_canonical() + " hits of " + std::to_string(h.total), true});
        break;
      }
      const Decimal base = completeness_from_hits(h.hits, h.total, false);
      const bool bonus = (h.hits > Decimal() && h.hits < Decimal::from_int(h.total) && verdict.score == base + half(1)) ||
                         verdict.reasoning.find("+0.5") != std::string::npos;
      const Decimal expected = completeness_from_hits(h.hits, h.total, bonus);
      if (expected != out.score) {
        out.log.push_back({"completeness_lookup", out.score, expected,
                           std::to_string(h.total) + " changes, " + h.hits.to_canonical() + " hits" +
                               (bonus ? " (+0.5)" : ""),
                           true});
        out.score = expected;
      }
      break;
    }
    case Dimension::kClarity: {
      const Decimal cap = clarity_ceiling(hits.size());
      if (out.score > cap) {
        std::string terms;
        for (const ForbiddenTermHit& h : hits) terms += (terms.empty() ? "" : ", ") + h.term;
        out.log.push_back({"forbidden_term_ceiling", out.score, cap, std::to_string(hits.size()) + " hit(s): " + terms,
                           false});
        out.score = cap;
      }
      break;
    }
  }
  return out;
}

Decimal weighted_sum(Decimal accuracy, Decimal completeness, Decimal clarity) {
  return (accuracy * 4 + completeness * 4 + clarity * 2).scaled(1, 10);
}

CompositeScore composite(Decimal accuracy, Decimal completeness, Decimal clarity) {
  for (Decimal v : {accuracy, completeness, clarity}) {
    if (v < Decimal::from_int(1) || v > Decimal::from_int(5)) {
      raise(ErrorCode::kInputOutOfRange, "dimension score " + v.to_canonical() + " outside [1,5]");
    }
  }
  return {accuracy, completeness, clarity, weighted_sum(accuracy, completeness, clarity)};
}

}  // namespace editfactory::judge
