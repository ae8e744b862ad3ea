#pragma once

#include <stdexcept>
#include <string>

#include "dlockout/lockout.hpp"

namespace dlockout {

// Missing, unreadable or corrupt state files are errors: the caller must
// refuse to simulate (fail-closed), otherwise deleting the file would emulate
// a cold reboot with a cleared counter.
struct StateError : std::runtime_error {
	explicit StateError(const std::string &msg) : std::runtime_error(msg) {}
};

LockoutState load_lockout_state(const std::string &path);

// Atomic write (temp file + rename): a crash mid-save never leaves a state
// with a counter lower than before the run.
void save_lockout_state(const std::string &path, const LockoutState &s);

// State directory: $DLOCKOUT_STATE_DIR when set, otherwise the current
// directory. The file is named after the design.
std::string state_path_for(const std::string &design_name);

// Advisory single-writer lock (flock) held for the object's lifetime.
class StateLock {
public:
	explicit StateLock(const std::string &state_path);
	~StateLock();
	StateLock(const StateLock &) = delete;
	StateLock &operator=(const StateLock &) = delete;

private:
	int fd_ = -1;
	std::string lock_path_;
};

} // namespace dlockout
