#include "workbench/errors.hpp"

#include <utility>

namespace workbench {

ProviderError::ProviderError(const std::string& what, int attempts, bool unreachable)
    : std::runtime_error(what + " (attempts: " + std::to_string(attempts) + ")"),
      attempts_(attempts),
      unreachable_(unreachable) {}

SuggestionError::SuggestionError(const std::string& what, std::string raw_response)
    : std::runtime_error(what), raw_(std::move(raw_response)) {}

IngestError::IngestError(const std::string& what, std::size_t embedded, std::size_t total)
    : std::runtime_error(what + " (embedded " + std::to_string(embedded) + " of " +
                         std::to_string(total) + " records)"),
      embedded_(embedded),
      total_(total) {}

}  // namespace workbench
