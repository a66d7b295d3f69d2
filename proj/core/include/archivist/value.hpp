#pragma once

#include <nlohmann/json.hpp>

#include <string_view>

namespace archivist {

/// The neutral value tree every stage exchanges: Null, Boolean, Integer
/// (64-bit signed), Float (64-bit binary), Text, List, or Map with
/// insertion-ordered unique keys. Backed by nlohmann's ordered JSON type,
/// which models exactly these kinds; map ordering is erased only at
/// canonical export.
using Value = nlohmann::ordered_json;

/// Distinguished "no value at this path" outcome of value_get.
/// A null Value is a real value; Missing is the absence of one.
inline constexpr const Value* kMissing = nullptr;

/// Look up the sub-value at a `/`-separated pointer. List elements are
/// addressed by decimal index ("a/1"). The empty pointer names the root.
/// Returns nullptr (Missing) for absent paths; never throws on absence.
///
/// Throws PointerSyntaxError when the pointer itself is malformed
/// (an empty segment, i.e. leading/trailing/double slash).
const Value* value_get(const Value& root, std::string_view pointer);

/// Structural equality that distinguishes value kinds: Integer 16 and
/// Float 16.0 are not strictly equal even though they compare equal
/// numerically. Map key order is ignored (maps are sets of pairs).
bool strict_equal(const Value& a, const Value& b);

/// True when the value is Integer or Float.
inline bool is_numeric(const Value& v) {
    return v.is_number_integer() || v.is_number_unsigned() || v.is_number_float();
}

/// Numeric view of an Integer or Float value.
inline double as_double(const Value& v) {
    return v.get<double>();
}

} // namespace archivist
