#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ueq {

/// Base type tags. Opaque marks the unknown remainder of a generic schema;
/// Any is used when the type of an expression cannot be inferred.
enum class BaseType { Int, Bool, String, Any, Opaque };

std::string_view to_string(BaseType type);
std::optional<BaseType> parse_base_type(std::string_view name);

/// Two types may be compared for equality.
bool types_compatible(BaseType a, BaseType b);

struct Column {
   std::string name;
   BaseType type = BaseType::Int;
   /// For Opaque columns: the generic schema whose "??" this column stands for.
   std::string opaque_origin;

   bool operator==(const Column&) const = default;
};

/// A schema is an ordered list of columns. Columns are addressed by position;
/// names only serve resolution, and may repeat in inferred schemas (e.g. `SELECT *`
/// over a self-join).
struct Schema {
   std::string name;
   std::vector<Column> columns;

   bool generic() const;
   std::size_t size() const { return columns.size(); }
   /// Positions of every column called `name` (opaque columns never match).
   std::vector<std::size_t> find_all(std::string_view name) const;
   /// The opaque column position, if the schema is generic.
   std::optional<std::size_t> opaque_column() const;
};

using SchemaPtr = std::shared_ptr<const Schema>;

/// Same positional column types (names ignored). Tuples of same-shaped schemas
/// range over the same summation domain.
bool same_shape(const Schema& a, const Schema& b);

/// Concatenation, as produced by `SELECT *` over several sources.
SchemaPtr concat_schemas(const std::vector<SchemaPtr>& parts, std::string name = {});

std::string describe(const Schema& schema);

} // namespace ueq
