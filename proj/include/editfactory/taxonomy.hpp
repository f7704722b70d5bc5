#pragma once

#include <optional>
#include <span>
#include <string_view>

namespace editfactory::corpus {

enum class Category { kSemantic, kStylistic, kStructural };

enum class Subtype {
  // Semantic
  kAddObject,
  kRemoveObject,
  kReplaceObject,
  kBackgroundChange,
  // Stylistic
  kColorAlteration,
  kStyleTransfer,
  kToneTransformation,
  kMaterialModification,
  // Structural
  kViewChange,
  kMotionChange,
  kPortraitChange,
  kTextModification,
  kHybrid,
};

inline constexpr Category kAllCategories[] = {Category::kSemantic, Category::kStylistic,
                                              Category::kStructural};

struct TaxonomyLabel {
  Category category;
  Subtype subtype;
  friend bool operator==(const TaxonomyLabel&, const TaxonomyLabel&) = default;
};

std::span<const Subtype> subtypes_of(Category category);
Category category_of(Subtype subtype);
bool is_legal(Category category, Subtype subtype);

std::string_view to_string(Category category);
std::string_view to_string(Subtype subtype);
std::optional<Category> parse_category(std::string_view name);
std::optional<Subtype> parse_subtype(std::string_view name);

// Throws Error(kIllegalTaxonomy) for unknown names or an illegal cross.
TaxonomyLabel make_label(std::string_view category, std::string_view subtype);

}  // namespace editfactory::corpus
