#include "dlockout/statefile.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <json.hpp>

namespace dlockout {

LockoutState load_lockout_state(const std::string &path)
{
	std::ifstream f(path);
	if (!f)
		throw StateError("lockout state file missing or unreadable: " + path +
				 " (refusing to run; treat the device as locked)");
	std::stringstream ss;
	ss << f.rdbuf();
	nlohmann::json j;
	try {
		j = nlohmann::json::parse(ss.str());
	} catch (const nlohmann::json::exception &e) {
		throw StateError("lockout state file corrupt: " + path + " (" + e.what() +
				 "; refusing to run; treat the device as locked)");
	}
	LockoutState s;
	try {
		s.counter = j.at("counter").get<int>();
		s.threshold = j.at("threshold").get<int>();
		std::string phase = j.at("phase").get<std::string>();
		if (phase == "FREE")
			s.phase = LockoutPhase::Free;
		else if (phase == "PARTIAL")
			s.phase = LockoutPhase::Partial;
		else if (phase == "FULL")
			s.phase = LockoutPhase::Full;
		else
			throw StateError("lockout state file corrupt: unknown phase " + phase);
	} catch (const nlohmann::json::exception &e) {
		throw StateError("lockout state file corrupt: " + path + " (" + std::string(e.what()) + ")");
	}
	if (!s.valid() || s.phase != phase_for(s.counter, s.threshold))
		throw StateError("lockout state file inconsistent: " + path +
				 " (refusing to run; treat the device as locked)");
	return s;
}

void save_lockout_state(const std::string &path, const LockoutState &s)
{
	if (!s.valid())
		throw StateError("refusing to persist an invalid lockout state");
	nlohmann::ordered_json j;
	j["counter"] = s.counter;
	j["threshold"] = s.threshold;
	j["phase"] = to_string(s.phase);
	std::string tmp = path + ".tmp";
	{
		std::ofstream f(tmp, std::ios::trunc);
		if (!f)
			throw StateError("cannot write state file: " + tmp);
		f << j.dump(2) << "\n";
		f.flush();
		if (!f)
			throw StateError("short write to state file: " + tmp);
	}
	if (std::rename(tmp.c_str(), path.c_str()) != 0) {
		std::remove(tmp.c_str());
		throw StateError("cannot replace state file: " + path);
	}
}

std::string state_path_for(const std::string &design_name)
{
	const char *dir = std::getenv("DLOCKOUT_STATE_DIR");
	std::string base = dir && *dir ? std::string(dir) : std::string(".");
	return base + "/" + design_name + ".lockout.json";
}

StateLock::StateLock(const std::string &state_path) : lock_path_(state_path + ".lock")
{
	fd_ = ::open(lock_path_.c_str(), O_CREAT | O_RDWR, 0644);
	if (fd_ < 0)
		throw StateError("cannot open lock file: " + lock_path_);
	if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
		::close(fd_);
		fd_ = -1;
		throw StateError("state file is locked by another process: " + state_path);
	}
}

StateLock::~StateLock()
{
	if (fd_ >= 0) {
		::flock(fd_, LOCK_UN);
		::close(fd_);
	}
}

} // namespace dlockout
