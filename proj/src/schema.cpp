#include "ueq/schema.hpp"

#include <algorithm>
#include <cctype>

namespace ueq {

std::string_view to_string(BaseType type) {
   switch (type) {
      case BaseType::Int: return "int";
      case BaseType::Bool: return "bool";
      case BaseType::String: return "string";
      case BaseType::Any: return "any";
      case BaseType::Opaque: return "??";
   }
   return "?";
}

std::optional<BaseType> parse_base_type(std::string_view name) {
   std::string lower(name);
   std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
   if (lower == "int" || lower == "integer") return BaseType::Int;
   if (lower == "bool" || lower == "boolean") return BaseType::Bool;
   if (lower == "string" || lower == "text" || lower == "varchar") return BaseType::String;
   return std::nullopt;
}

bool types_compatible(BaseType a, BaseType b) {
   if (a == BaseType::Any || b == BaseType::Any) return true;
   return a == b;
}

bool Schema::generic() const {
   return opaque_column().has_value();
}

std::vector<std::size_t> Schema::find_all(std::string_view attr) const {
   std::vector<std::size_t> result;
   for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i].type != BaseType::Opaque && columns[i].name == attr) result.push_back(i);
   return result;
}

std::optional<std::size_t> Schema::opaque_column() const {
   for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i].type == BaseType::Opaque) return i;
   return std::nullopt;
}

bool same_shape(const Schema& a, const Schema& b) {
   if (a.columns.size() != b.columns.size()) return false;
   for (std::size_t i = 0; i < a.columns.size(); ++i) {
      const auto& ca = a.columns[i];
      const auto& cb = b.columns[i];
      if (ca.type != cb.type) return false;
      if (ca.type == BaseType::Opaque && ca.opaque_origin != cb.opaque_origin) return false;
   }
   return true;
}

SchemaPtr concat_schemas(const std::vector<SchemaPtr>& parts, std::string name) {
   auto result = std::make_shared<Schema>();
   result->name = std::move(name);
   for (const auto& p : parts)
      result->columns.insert(result->columns.end(), p->columns.begin(), p->columns.end());
   return result;
}

std::string describe(const Schema& schema) {
   std::string out = schema.name + "(";
   for (std::size_t i = 0; i < schema.columns.size(); ++i) {
      if (i) out += ", ";
      const auto& c = schema.columns[i];
      if (c.type == BaseType::Opaque)
         out += "??";
      else
         out += c.name + ":" + std::string(to_string(c.type));
   }
   return out + ")";
}

} // namespace ueq
