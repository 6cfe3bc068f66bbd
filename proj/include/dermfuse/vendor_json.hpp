#pragma once

// nlohmann/json ships as vendor/json.hpp; the system package is used as a fallback.
#if __has_include(<json.hpp>)
#include <json.hpp>
#else
#include <nlohmann/json.hpp>
#endif
