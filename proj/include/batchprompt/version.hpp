#pragma once

namespace batchprompt {

inline constexpr const char* kToolName = "batchprompt";
inline constexpr const char* kVersion = "0.1.0";

}  // namespace batchprompt
