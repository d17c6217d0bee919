#include <cstdio>

#include "bubble/common.hpp"

namespace bubble {

namespace {
std::string stale_message(double reference_hpa, double frame_hpa) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "stale reference: captured at %.1f hPa, frame at %.1f hPa; reset required",
                reference_hpa, frame_hpa);
  return buf;
}
}  // namespace

StaleReferenceError::StaleReferenceError(double reference_hpa, double frame_hpa)
    : Error(stale_message(reference_hpa, frame_hpa)), reference_hpa_(reference_hpa), frame_hpa_(frame_hpa) {}

FormatError::FormatError(const std::string& what, std::size_t offset)
    : Error(what + " at byte offset " + std::to_string(offset)), offset_(offset) {}

}  // namespace bubble
