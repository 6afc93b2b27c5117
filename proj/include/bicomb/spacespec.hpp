#pragma once

// JSON space descriptions: named families with parameters, explicit
// chart/gluing atlases, and explicit cube lists. Parsing normalizes a
// document into a canonical form (fixed key order, defaults made explicit)
// whose re-parse emits identical bytes.

#include <string>

#include "bicomb/space.hpp"

namespace bicomb {

AtlasPtr space_from_json(const std::string& text);

// Validating parse + canonical re-emit.
std::string canonical_space_json(const std::string& text);

// Canonical document for a built-in family token (lsp3, ck90_2, fxi, ...).
std::string token_space_json(const std::string& token);

// CLI shorthand: a family token, or a path to a JSON document (bare path
// containing '/', ending in .json, or prefixed with @).
AtlasPtr space_from_token(const std::string& token);

// One-object summary of a built atlas (family, charts, gluing count, p).
std::string describe_space(const ChartAtlas& atlas);

}  // namespace bicomb
