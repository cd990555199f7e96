// Minimal structural JSON Schema checker covering the subset used by the
// shipped schemas: type, required, properties, items.
#ifndef COPMIX_TEST_SCHEMA_CHECK_HPP
#define COPMIX_TEST_SCHEMA_CHECK_HPP

#include <string>

#include "json.hpp"

namespace schema_check {

using nlohmann::json;

inline bool type_matches(const std::string& type, const json& v) {
    if (type == "object") return v.is_object();
    if (type == "array") return v.is_array();
    if (type == "string") return v.is_string();
    if (type == "boolean") return v.is_boolean();
    if (type == "integer") return v.is_number_integer() || v.is_number_unsigned();
    if (type == "number") return v.is_number();
    return false;
}

inline bool validate(const json& schema, const json& value, std::string* why = nullptr) {
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    if (schema.contains("type") &&
        !type_matches(schema["type"].get<std::string>(), value))
        return fail("type mismatch: expected " + schema["type"].get<std::string>() +
                    " at " + value.dump().substr(0, 80));
    if (schema.contains("required"))
        for (const auto& key : schema["required"])
            if (!value.contains(key.get<std::string>()))
                return fail("missing required key " + key.get<std::string>());
    if (schema.contains("properties") && value.is_object())
        for (const auto& [key, sub] : schema["properties"].items())
            if (value.contains(key) && !validate(sub, value.at(key), why))
                return false;
    if (schema.contains("items") && value.is_array())
        for (const auto& el : value)
            if (!validate(schema["items"], el, why)) return false;
    return true;
}

} // namespace schema_check

#endif
