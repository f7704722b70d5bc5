#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace editfactory::judge {

enum class TermClass { kVagueVerb, kVagueDegree, kVagueRef };

std::string_view to_string(TermClass c);

struct ForbiddenTermHit {
  std::string term;  // canonical term, e.g. "appropriate" for "appropriately"
  TermClass term_class = TermClass::kVagueVerb;
  std::size_t begin = 0;  // byte offsets into the scanned text
  std::size_t end = 0;
};

struct ForbiddenTerm {
  std::string term;
  TermClass term_class;
  // Accepted surface forms, each one or more space-separated words.
  std::vector<std::string> forms;
};

struct ScannerConfig {
  std::vector<ForbiddenTerm> terms;
  // Determiners ("that", "this") count only when the next token is not noun-like.
  std::vector<std::string> demonstratives;
  // Tokens treated as not noun-like after a demonstrative.
  std::vector<std::string> verbs;
  std::vector<std::string> function_words;
  // "that" right after one of these ("so that", "make sure that") joins
  // clauses and is never a reference.
  std::vector<std::string> conjunction_leads;
  // Drop vague-verb hits whose clause also names a concrete target value
  // (color word, number, quoted string).
  bool suppress_verbs_with_target_state = true;
  std::vector<std::string> color_words;

  static const ScannerConfig& defaults();
};

// Case-insensitive, word-boundary matching; hits come back in text order.
std::vector<ForbiddenTermHit> scan_forbidden_terms(std::string_view instruction,
                                                   const ScannerConfig& config = ScannerConfig::defaults());

}  // namespace editfactory::judge
