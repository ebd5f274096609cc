#include "revphase/errors.hpp"

namespace revphase {

void throw_domain(const std::string& what) { throw DomainError(what); }
void throw_config(const std::string& what) { throw ConfigError(what); }

}  // namespace revphase
