#include "editfactory/taxonomy.hpp"

#include <array>

#include "editfactory/error.hpp"

namespace editfactory::corpus {
namespace {

constexpr std::array kSemantic = {Subtype::kAddObject, Subtype::kRemoveObject, Subtype::kReplaceObject,
                                  Subtype::kBackgroundChange};
constexpr std::array kStylistic = {Subtype::kColorAlteration, Subtype::kStyleTransfer,
                                   Subtype::kToneTransformation, Subtype::kMaterialModification};
constexpr std::array kStructural = {Subtype::kViewChange, Subtype::kMotionChange, Subtype::kPortraitChange,
                                    Subtype::kTextModification, Subtype::kHybrid};

struct SubtypeName {
  Subtype subtype;
  std::string_view name;
};

constexpr SubtypeName kSubtypeNames[] = {
    {Subtype::kAddObject, "AddObject"},
    {Subtype::kRemoveObject, "RemoveObject"},
    {Subtype::kReplaceObject, "ReplaceObject"},
    {Subtype::kBackgroundChange, "BackgroundChange"},
    {Subtype::kColorAlteration, "ColorAlteration"},
    {Subtype::kStyleTransfer, "StyleTransfer"},
    {Subtype::kToneTransformation, "ToneTransformation"},
    {Subtype::kMaterialModification, "MaterialModification"},
    {Subtype::kViewChange, "ViewChange"},
    {Subtype::kMotionChange, "MotionChange"},
    {Subtype::kPortraitChange, "PortraitChange"},
    {Subtype::kTextModification, "TextModification"},
    {Subtype::kHybrid, "Hybrid"},
};

}  // namespace

std::span<const Subtype> subtypes_of(Category category) {
  switch (category) {
    case Category::kSemantic: return kSemantic;
    case Category::kStylistic: return kStylistic;
    case Category::kStructural: return kStructural;
  }
  return {};
}

Category category_of(Subtype subtype) {
  for (Category c : kAllCategories) {
    for (Subtype s : subtypes_of(c)) {
      if (s == subtype) return c;
    }
  }
  raise(ErrorCode::kIllegalTaxonomy, "subtype without category");
}

bool is_legal(Category category, Subtype subtype) { return category_of(subtype) == category; }

std::string_view to_string(Category category) {
  switch (category) {
    case Category::kSemantic: return "Semantic";
    case Category::kStylistic: return "Stylistic";
    case Category::kStructural: return "Structural";
  }
  return "?";
}

std::string_view to_string(Subtype subtype) {
  for (const auto& e : kSubtypeNames) {
    if (e.subtype == subtype) return e.name;
  }
  return "?";
}

std::optional<Category> parse_category(std::string_view name) {
  for (Category c : kAllCategories) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

std::optional<Subtype> parse_subtype(std::string_view name) {
  for (const auto& e : kSubtypeNames) {
    if (e.name == name) return e.subtype;
  }
  return std::nullopt;
}

TaxonomyLabel make_label(std::string_view category, std::string_view subtype) {
  auto c = parse_category(category);
  if (!c) raise(ErrorCode::kIllegalTaxonomy, "unknown category '" + std::string(category) + "'");
  auto s = parse_subtype(subtype);
  if (!s) raise(ErrorCode::kIllegalTaxonomy, "unknown subtype '" + std::string(subtype) + "'");
  if (!is_legal(*c, *s)) {
    raise(ErrorCode::kIllegalTaxonomy,
          "subtype " + std::string(subtype) + " is not legal for category " + std::string(category));
  }
  return {*c, *s};
}

}  // namespace editfactory::corpus
