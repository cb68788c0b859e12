#pragma once

namespace bcl {
inline constexpr const char* kLibraryVersion = "0.1.0";
inline constexpr const char* kReportSchema = "bcl-report/1";
}  // namespace bcl
