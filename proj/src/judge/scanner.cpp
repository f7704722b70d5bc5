#include <algorithm>
#include <cctype>
#include <optional>
#include <unordered_set>

#include "editfactory/judge.hpp"
#include "editfactory/util.hpp"

namespace editfactory::judge {

std::string_view to_string(TermClass c) {
  switch (c) {
    case TermClass::kVagueVerb: return "vague_verb";
    case TermClass::kVagueDegree: return "vague_degree";
    case TermClass::kVagueRef: return "vague_ref";
  }
  return "unknown";
}

const ScannerConfig& ScannerConfig::defaults() {
  static const ScannerConfig cfg = [] {
    ScannerConfig c;
    c.terms = {
        {"adjust", TermClass::kVagueVerb, {"adjust", "adjusts", "adjusted", "adjusting"}},
        {"process", TermClass::kVagueVerb, {"process", "processes", "processed", "processing"}},
        {"optimize",
         TermClass::kVagueVerb,
         {"optimize", "optimizes", "optimized", "optimizing", "optimise", "optimises", "optimised", "optimising"}},
        {"modify", TermClass::kVagueVerb, {"modify", "modifies", "modified", "modifying"}},
        {"appropriate", TermClass::kVagueDegree, {"appropriate", "appropriately"}},
        {"slightly", TermClass::kVagueDegree, {"slightly"}},
        {"a bit", TermClass::kVagueDegree, {"a bit"}},
        {"somewhat", TermClass::kVagueDegree, {"somewhat"}},
        {"that", TermClass::kVagueRef, {"that"}},
        {"this", TermClass::kVagueRef, {"this"}},
        {"it", TermClass::kVagueRef, {"it"}},
        {"refer to original image",
         TermClass::kVagueRef,
         {"refer to original image", "refer to the original image", "refers to original image",
          "refers to the original image", "referring to original image", "referring to the original image"}},
    };
    c.demonstratives = {"that", "this"};
    c.verbs = {"make",   "makes",   "made",     "look",    "looks",   "change", "changes", "changed", "turn",
               "turns",  "become",  "becomes",  "appear",  "appears", "seem",   "seems",   "add",     "remove",
               "replace", "move",   "put",      "place",   "set",     "keep",   "get",     "gets",    "give",
               "increase", "decrease", "reduce", "enhance", "improve", "fix",   "brighten", "darken", "enlarge",
               "shrink", "rotate",  "fit",      "match",   "stand",   "stands", "stay",    "stays",   "use",
               "show",   "shows",   "fill",     "cover",   "blend",   "resize", "crop",    "convert", "transform"};
    c.function_words = {"a",    "an",   "the",  "to",    "and",  "or",   "but",  "so",    "then", "with", "without",
                        "in",   "on",   "at",   "of",    "for",  "from", "by",   "into",  "onto", "as",   "is",
                        "are",  "was",  "were", "be",    "been", "being", "up",  "down",  "out",  "off",  "over",
                        "back", "more", "less", "very",  "too",  "also", "just", "only",  "again", "here", "there",
                        "now",  "one",  "ones", "way",   "thing", "things", "part", "area", "region", "stuff", "all",
                        "much", "if",   "when", "where", "which", "who",  "whose", "while", "than", "like", "its"};
    c.conjunction_leads = {"so", "such", "sure", "ensure", "ensuring", "ensures"};
    c.color_words = {"red",    "orange", "yellow", "green", "blue",   "purple", "violet", "pink",
                     "brown",  "black",  "white",  "gray",  "grey",   "beige",  "cyan",   "magenta",
                     "teal",   "navy",   "maroon", "gold",  "golden", "silver", "turquoise", "indigo",
                     "crimson", "olive", "lavender", "tan", "ivory",  "amber"};
    return c;
  }();
  return cfg;
}

namespace {

struct Token {
  std::string lower;
  std::size_t begin;
  std::size_t end;
  bool word;
  std::size_t clause;  // index of the clause the token belongs to
};

bool is_word_byte(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '\'' || c == '_' ||
         c >= 0x80;
}

bool is_clause_break(char c) {
  return c == ',' || c == ';' || c == '.' || c == '!' || c == '?' || c == ':' || c == '\n';
}

bool is_quote(char c) { return c == '"' || c == '`'; }

std::vector<Token> tokenize(std::string_view s) {
  std::vector<Token> out;
  std::size_t clause = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    if (is_word_byte(c)) {
      std::size_t j = i;
      while (j < s.size() && is_word_byte(static_cast<unsigned char>(s[j]))) ++j;
      // Leading and trailing apostrophes are quotes, not part of the word.
      std::size_t begin = i, end = j;
      while (begin < end && s[begin] == '\'') ++begin;
      while (end > begin && s[end - 1] == '\'') --end;
      if (end > begin) out.push_back({to_lower_ascii(s.substr(begin, end - begin)), begin, end, true, clause});
      i = j;
    } else if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
    } else {
      if (is_clause_break(s[i])) {
        // Decimal points inside numbers are not clause breaks.
        const bool in_number = s[i] == '.' && i > 0 && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i - 1])) &&
                               std::isdigit(static_cast<unsigned char>(s[i + 1]));
        out.push_back({std::string(1, s[i]), i, i + 1, false, clause});
        if (!in_number) ++clause;
      } else {
        out.push_back({std::string(1, s[i]), i, i + 1, false, clause});
      }
      ++i;
    }
  }
  return out;
}

std::vector<std::string> split_words(std::string_view form) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < form.size()) {
    while (i < form.size() && form[i] == ' ') ++i;
    std::size_t j = i;
    while (j < form.size() && form[j] != ' ') ++j;
    if (j > i) out.push_back(to_lower_ascii(form.substr(i, j - i)));
    i = j;
  }
  return out;
}

struct Form {
  std::vector<std::string> words;
  const ForbiddenTerm* term;
};

// Clauses that name a concrete target value: a color word, a number or a
// quoted string.
std::unordered_set<std::size_t> concrete_clauses(std::string_view text, const std::vector<Token>& toks,
                                                 const std::unordered_set<std::string>& colors) {
  std::unordered_set<std::size_t> out;
  for (const Token& t : toks) {
    if (!t.word) continue;
    if (colors.count(t.lower)) out.insert(t.clause);
    if (std::any_of(t.lower.begin(), t.lower.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      out.insert(t.clause);
    }
  }
  // Quoted strings: a matched pair of double quotes (ASCII or curly) or
  // backticks within one clause, or a single-quoted span opened at a word start.
  for (std::size_t i = 0; i < toks.size(); ++i) {
    const Token& t = toks[i];
    if (t.word || !is_quote(text[t.begin])) continue;
    for (std::size_t k = i + 1; k < toks.size() && toks[k].clause == t.clause; ++k) {
      if (!toks[k].word && text[toks[k].begin] == text[t.begin] && k > i + 1) {
        out.insert(t.clause);
        break;
      }
    }
  }
  auto clause_at = [&](std::size_t pos) -> std::optional<std::size_t> {
    for (const Token& t : toks) {
      if (t.end > pos) return t.clause;
    }
    return std::nullopt;
  };
  auto word_at = [&](std::size_t pos) {
    return pos < text.size() && is_word_byte(static_cast<unsigned char>(text[pos])) && text[pos] != '\'';
  };
  for (std::size_t p = 0; p < text.size(); ++p) {
    if (text[p] != '\'' || (p > 0 && word_at(p - 1)) || !word_at(p + 1)) continue;
    for (std::size_t q = p + 2; q < text.size() && !is_clause_break(text[q]); ++q) {
      if (text[q] == '\'' && word_at(q - 1) && !word_at(q + 1)) {
        if (auto c = clause_at(p + 1)) out.insert(*c);
        break;
      }
    }
  }
  const std::string_view open = "\xE2\x80\x9C", close = "\xE2\x80\x9D";
  for (std::size_t p = text.find(open); p != std::string_view::npos; p = text.find(open, p + 1)) {
    const std::size_t q = text.find(close, p + open.size());
    if (q == std::string_view::npos) break;
    for (const Token& t : toks) {
      if (t.begin >= p && t.begin < q) {
        out.insert(t.clause);
        break;
      }
    }
  }
  return out;
}

}  // namespace

std::vector<ForbiddenTermHit> scan_forbidden_terms(std::string_view instruction, const ScannerConfig& config) {
  const std::vector<Token> toks = tokenize(instruction);

  std::vector<Form> forms;
  for (const ForbiddenTerm& t : config.terms) {
    for (const std::string& f : t.forms) forms.push_back({split_words(f), &t});
  }
  // Longest surface form wins at a given position.
  std::stable_sort(forms.begin(), forms.end(),
                   [](const Form& a, const Form& b) { return a.words.size() > b.words.size(); });

  const std::unordered_set<std::string> demonstratives(config.demonstratives.begin(), config.demonstratives.end());
  const std::unordered_set<std::string> verbs(config.verbs.begin(), config.verbs.end());
  const std::unordered_set<std::string> function_words(config.function_words.begin(), config.function_words.end());
  const std::unordered_set<std::string> conjunction_leads(config.conjunction_leads.begin(),
                                                          config.conjunction_leads.end());
  const std::unordered_set<std::string> colors(config.color_words.begin(), config.color_words.end());
  std::unordered_set<std::string> forbidden_words;
  for (const Form& f : forms) {
    if (f.words.size() == 1) forbidden_words.insert(f.words[0]);
  }
  for (const ForbiddenTerm& t : config.terms) {
    if (t.term_class == TermClass::kVagueVerb) {
      for (const std::string& f : t.forms) forbidden_words.insert(to_lower_ascii(f));
    }
  }
  const auto concrete = config.suppress_verbs_with_target_state ? concrete_clauses(instruction, toks, colors)
                                                                : std::unordered_set<std::size_t>{};

  auto noun_like = [&](std::size_t idx) {
    if (idx >= toks.size() || !toks[idx].word) return false;
    const std::string& w = toks[idx].lower;
    if (verbs.count(w) || function_words.count(w) || forbidden_words.count(w)) return false;
    if (w.size() > 3 && w.compare(w.size() - 2, 2, "ly") == 0) return false;
    return true;
  };

  std::vector<ForbiddenTermHit> hits;
  std::size_t i = 0;
  while (i < toks.size()) {
    if (!toks[i].word) {
      ++i;
      continue;
    }
    const Form* match = nullptr;
    for (const Form& f : forms) {
      if (i + f.words.size() > toks.size()) continue;
      bool ok = true;
      for (std::size_t k = 0; k < f.words.size() && ok; ++k) {
        ok = toks[i + k].word && toks[i + k].lower == f.words[k];
      }
      if (ok) {
        match = &f;
        break;
      }
    }
    if (!match) {
      ++i;
      continue;
    }
    const std::size_t last = i + match->words.size() - 1;
    bool keep = true;
    if (match->words.size() == 1 && demonstratives.count(match->words[0])) {
      keep = !noun_like(i + 1);
      if (match->words[0] == "that" && i > 0 && toks[i - 1].word && conjunction_leads.count(toks[i - 1].lower)) {
        keep = false;
      }
    }
    if (match->term->term_class == TermClass::kVagueVerb && concrete.count(toks[i].clause)) keep = false;
    if (keep) {
      hits.push_back({match->term->term, match->term->term_class, toks[i].begin, toks[last].end});
    }
    i = last + 1;
  }
  return hits;
}

}  // namespace editfactory::judge
