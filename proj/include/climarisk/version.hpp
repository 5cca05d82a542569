#ifndef CLIMARISK_VERSION_HPP
#define CLIMARISK_VERSION_HPP

#define CLIMARISK_VERSION_MAJOR 0
#define CLIMARISK_VERSION_MINOR 1
#define CLIMARISK_VERSION_PATCH 0
#define CLIMARISK_VERSION "0.1.0"

namespace climarisk {

inline const char* version() { return CLIMARISK_VERSION; }

} // namespace climarisk

#endif // CLIMARISK_VERSION_HPP
