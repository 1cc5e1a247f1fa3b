#pragma once

#include <array>
#include <compare>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "linkintent/errors.hpp"
#include "linkintent/strings.hpp"

namespace linkintent {

inline constexpr size_t kCategoryCount = 6;
inline constexpr size_t kClassCount = 26;

/// The closed set of category short codes, in canonical order, with the
/// number of intention classes each category must contain.
inline const std::array<std::pair<std::string_view, size_t>, kCategoryCount>
    kCategorySpec = {{{"Share", 8},
                      {"Entertain", 2},
                      {"Offer", 4},
                      {"Converse", 4},
                      {"Promote", 4},
                      {"Request", 4}}};

struct IntentClass {
  std::string id;       // stable slug, e.g. "share.political_news"
  std::string name;     // display phrase, e.g. "To share political or public news"
  std::string example;  // illustrative example
  std::string parent;   // owning category id

  friend bool operator==(const IntentClass&, const IntentClass&) = default;
};

struct IntentCategory {
  std::string id;  // short code from the closed set
  std::string name;
  std::string definition;
  std::vector<IntentClass> classes;

  /// Combined display form, e.g. "Information Sharing (Share)".
  std::string display_name() const { return name + " (" + id + ")"; }

  friend bool operator==(const IntentCategory&, const IntentCategory&) = default;
};

enum class LabelKind { Category, Class, Uncertain };

/// A resolved intent label: a top-level category, a fine-grained class,
/// or the annotator escape hatch "uncertain".
struct IntentLabel {
  LabelKind kind = LabelKind::Uncertain;
  std::string id;  // category id or class slug; empty for Uncertain

  static IntentLabel category(std::string cat_id) {
    return {LabelKind::Category, std::move(cat_id)};
  }
  static IntentLabel intent_class(std::string slug) {
    return {LabelKind::Class, std::move(slug)};
  }
  static IntentLabel uncertain() { return {LabelKind::Uncertain, ""}; }

  bool is_uncertain() const { return kind == LabelKind::Uncertain; }

  /// Stable text key: category id, class slug, or "uncertain".
  std::string key() const { return is_uncertain() ? "uncertain" : id; }

  friend auto operator<=>(const IntentLabel&, const IntentLabel&) = default;
};

class Taxonomy {
 public:
  int version = 1;

  const std::vector<IntentCategory>& categories() const { return categories_; }

  const IntentCategory* find_category(std::string_view id) const {
    for (const auto& c : categories_) {
      if (iequals(c.id, id)) return &c;
    }
    return nullptr;
  }

  const IntentClass* find_class(std::string_view slug) const {
    for (const auto& c : categories_) {
      for (const auto& k : c.classes) {
        if (iequals(k.id, slug)) return &k;
      }
    }
    return nullptr;
  }

  size_t class_count() const {
    size_t n = 0;
    for (const auto& c : categories_) n += c.classes.size();
    return n;
  }

  /// Case-insensitive match on category id, category name, combined
  /// display name, class slug, or class name; "uncertain" resolves to
  /// the Uncertain label. Throws LookupError when nothing matches.
  IntentLabel resolve_label(std::string_view text) const {
    std::string t = normalize_ws(text);
    if (iequals(t, "uncertain")) return IntentLabel::uncertain();
    for (const auto& c : categories_) {
      if (iequals(t, c.id) || iequals(t, c.name) || iequals(t, c.display_name()))
        return IntentLabel::category(c.id);
    }
    for (const auto& c : categories_) {
      for (const auto& k : c.classes) {
        if (iequals(t, k.id) || iequals(t, k.name)) return IntentLabel::intent_class(k.id);
      }
    }
    throw LookupError("unknown label: \"" + std::string(text) + "\"");
  }

  /// Category id owning the label (the label's own id for categories,
  /// the parent for classes). Throws for Uncertain.
  std::string category_of(const IntentLabel& label) const {
    switch (label.kind) {
      case LabelKind::Category: {
        const auto* c = find_category(label.id);
        if (!c) throw LookupError("label references unknown category: " + label.id);
        return c->id;
      }
      case LabelKind::Class: {
        const auto* k = find_class(label.id);
        if (!k) throw LookupError("label references unknown class: " + label.id);
        return k->parent;
      }
      case LabelKind::Uncertain:
        throw LookupError("uncertain label has no category");
    }
    throw LookupError("invalid label kind");
  }

  /// Text appended to a query or document when augmenting with this
  /// label: the category display name, plus the class name for
  /// class-level labels. Uncertain contributes nothing.
  std::string display(const IntentLabel& label) const {
    switch (label.kind) {
      case LabelKind::Category: {
        const auto* c = find_category(label.id);
        if (!c) throw LookupError("label references unknown category: " + label.id);
        return c->display_name();
      }
      case LabelKind::Class: {
        const auto* k = find_class(label.id);
        if (!k) throw LookupError("label references unknown class: " + label.id);
        const auto* c = find_category(k->parent);
        return c->display_name() + " " + k->name;
      }
      case LabelKind::Uncertain:
        return "";
    }
    return "";
  }

  /// Enforces the structural invariants: exactly 6 categories drawn
  /// from the closed code set, no duplicates, 26 classes distributed
  /// 8/2/4/4/4/4, unique class slugs, nonempty names.
  void validate() const {
    if (categories_.size() != kCategoryCount) {
      throw ValidationError("taxonomy must have exactly " + std::to_string(kCategoryCount) +
                            " categories, found " + std::to_string(categories_.size()));
    }
    std::map<std::string, size_t> expected;
    for (const auto& [id, n] : kCategorySpec) expected[std::string(id)] = n;
    std::map<std::string, int> seen;
    for (const auto& c : categories_) {
      auto it = expected.find(c.id);
      if (it == expected.end())
        throw ValidationError("category id outside the closed set: " + c.id);
      if (++seen[c.id] > 1) throw ValidationError("duplicate category id: " + c.id);
      if (c.name.empty()) throw ValidationError("category " + c.id + " has empty name");
      if (c.classes.size() != it->second) {
        throw ValidationError("category " + c.id + " must have " +
                              std::to_string(it->second) + " classes, found " +
                              std::to_string(c.classes.size()));
      }
    }
    std::map<std::string, int> slugs;
    size_t total = 0;
    for (const auto& c : categories_) {
      for (const auto& k : c.classes) {
        ++total;
        if (k.id.empty()) throw ValidationError("class with empty slug under " + c.id);
        if (k.name.empty()) throw ValidationError("class " + k.id + " has empty name");
        if (k.parent != c.id)
          throw ValidationError("class " + k.id + " has dangling parent " + k.parent);
        if (++slugs[to_lower(k.id)] > 1) throw ValidationError("duplicate class slug: " + k.id);
      }
    }
    if (total != kClassCount) {
      throw ValidationError("taxonomy must have exactly " + std::to_string(kClassCount) +
                            " classes, found " + std::to_string(total));
    }
  }

  /// Canonical text form; parse(serialize(t)) is structurally equal to t.
  std::string serialize() const {
    std::ostringstream out;
    out << "version = " << version << "\n";
    for (const auto& c : categories_) {
      out << "\n[category " << c.id << "]\n";
      out << "name = " << c.name << "\n";
      out << "definition = " << c.definition << "\n";
      for (const auto& k : c.classes) {
        out << "\n[class " << k.id << "]\n";
        out << "name = " << k.name << "\n";
        if (!k.example.empty()) out << "example = " << k.example << "\n";
      }
    }
    return out.str();
  }

  static Taxonomy parse(std::string_view content) {
    Taxonomy tax;
    IntentCategory* current_cat = nullptr;
    IntentClass* current_class = nullptr;
    bool saw_version = false;
    size_t line_no = 0;
    for (const auto& raw : split_lines(content)) {
      ++line_no;
      std::string_view line = trim(raw);
      if (line.empty() || line.front() == '#') continue;
      if (line.front() == '[') {
        if (line.back() != ']')
          throw ParseError("taxonomy", line_no, "unterminated section header");
        auto inner = split_ws(line.substr(1, line.size() - 2));
        if (inner.size() != 2)
          throw ParseError("taxonomy", line_no, "section header must be [category id] or [class slug]");
        if (inner[0] == "category") {
          tax.categories_.push_back(IntentCategory{inner[1], "", "", {}});
          current_cat = &tax.categories_.back();
          current_class = nullptr;
        } else if (inner[0] == "class") {
          if (!current_cat)
            throw ParseError("taxonomy", line_no, "class section before any category");
          current_cat->classes.push_back(IntentClass{inner[1], "", "", current_cat->id});
          current_class = &current_cat->classes.back();
        } else {
          throw ParseError("taxonomy", line_no, "unknown section kind: " + inner[0]);
        }
        continue;
      }
      auto eq = line.find('=');
      if (eq == std::string_view::npos)
        throw ParseError("taxonomy", line_no, "expected key = value");
      std::string key(trim(line.substr(0, eq)));
      std::string value(trim(line.substr(eq + 1)));
      if (!current_cat) {
        if (key == "version") {
          tax.version = std::stoi(value);
          saw_version = true;
        } else {
          throw ParseError("taxonomy", line_no, "unknown top-level key: " + key);
        }
      } else if (current_class) {
        if (key == "name") current_class->name = value;
        else if (key == "example") current_class->example = value;
        else throw ParseError("taxonomy", line_no, "unknown class key: " + key);
      } else {
        if (key == "name") current_cat->name = value;
        else if (key == "definition") current_cat->definition = value;
        else throw ParseError("taxonomy", line_no, "unknown category key: " + key);
      }
    }
    if (!saw_version && tax.categories_.empty())
      throw ParseError("taxonomy file is empty or has no recognizable content");
    tax.validate();
    return tax;
  }

  static Taxonomy load(const std::string& path) { return parse(read_file(path)); }

  friend bool operator==(const Taxonomy& a, const Taxonomy& b) {
    return a.version == b.version && a.categories_ == b.categories_;
  }

 private:
  std::vector<IntentCategory> categories_;
};

// ---------------------------------------------------------------------------
// Mappings from prior tweet-intent taxonomies onto our categories.

enum class PriorSource { Alhadi2011, GomezAdorno2014, Java2007 };

inline std::string to_string(PriorSource s) {
  switch (s) {
    case PriorSource::Alhadi2011: return "alhadi2011";
    case PriorSource::GomezAdorno2014: return "gomez_adorno2014";
    case PriorSource::Java2007: return "java2007";
  }
  return "?";
}

inline PriorSource parse_prior_source(std::string_view text) {
  std::string t = to_lower(normalize_ws(text));
  if (t == "alhadi2011" || t == "alhadi") return PriorSource::Alhadi2011;
  if (t == "gomez_adorno2014" || t == "gomezadorno2014" || t == "gomez-adorno2014")
    return PriorSource::GomezAdorno2014;
  if (t == "java2007" || t == "java") return PriorSource::Java2007;
  throw LookupError("unknown prior taxonomy source: \"" + std::string(text) + "\"");
}

struct PriorMapping {
  PriorSource source;
  std::string source_label;
  std::string target_category;

  friend bool operator==(const PriorMapping&, const PriorMapping&) = default;
};

/// Cross-taxonomy mapping table. One source label may map to several
/// of our categories; rows keep file order.
class PriorMappingTable {
 public:
  static PriorMappingTable parse(std::string_view content, const Taxonomy& tax) {
    PriorMappingTable table;
    size_t line_no = 0;
    for (const auto& raw : split_lines(content)) {
      ++line_no;
      std::string_view line = trim(raw);
      if (line.empty() || line.front() == '#') continue;
      auto cols = split(line, '\t');
      if (cols.size() != 3)
        throw ParseError("mapping", line_no, "expected 3 tab-separated columns");
      PriorMapping row;
      row.source = parse_prior_source(cols[0]);
      row.source_label = normalize_ws(cols[1]);
      const auto* cat = tax.find_category(normalize_ws(cols[2]));
      if (!cat)
        throw ValidationError("mapping row targets unknown category: " + cols[2]);
      row.target_category = cat->id;
      for (const auto& prev : table.rows_) {
        if (prev == row)
          throw ValidationError("duplicate mapping row for \"" + row.source_label + "\"");
      }
      table.rows_.push_back(std::move(row));
    }
    return table;
  }

  static PriorMappingTable load(const std::string& path, const Taxonomy& tax) {
    return parse(read_file(path), tax);
  }

  /// All target categories for the source label, in table order.
  std::vector<std::string> map_prior(PriorSource source, std::string_view label) const {
    std::vector<std::string> out;
    std::string wanted = normalize_ws(label);
    for (const auto& row : rows_) {
      if (row.source == source && iequals(row.source_label, wanted))
        out.push_back(row.target_category);
    }
    if (out.empty())
      throw LookupError("no mapping for " + to_string(source) + " label \"" +
                        std::string(label) + "\"");
    return out;
  }

  const std::vector<PriorMapping>& rows() const { return rows_; }

 private:
  std::vector<PriorMapping> rows_;
};

}  // namespace linkintent
