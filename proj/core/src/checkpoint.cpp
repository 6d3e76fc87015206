#include "rainfree/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>

namespace rainfree {
namespace {

constexpr std::array<char, 4> kModuleMagic{'R', 'F', 'N', 'T'};
constexpr std::array<char, 4> kAdamMagic{'R', 'F', 'A', 'D'};

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is, const std::filesystem::path& path) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw std::runtime_error("truncated checkpoint file " + path.string());
  }
  return v;
}

void put_tensor(std::ostream& os, const Tensor& t) {
  for (int d : {t.n(), t.c(), t.h(), t.w()}) put<std::int32_t>(os, d);
  os.write(reinterpret_cast<const char*>(t.ptr()), static_cast<std::streamsize>(t.size() * sizeof(float)));
}

Tensor get_tensor(std::istream& is, const std::filesystem::path& path) {
  std::array<int, 4> d{};
  for (int& v : d) {
    v = get<std::int32_t>(is, path);
    if (v < 0 || v > (1 << 24)) throw std::runtime_error("corrupt tensor header in " + path.string());
  }
  Tensor t({d[0], d[1], d[2], d[3]});
  if (!is.read(reinterpret_cast<char*>(t.ptr()), static_cast<std::streamsize>(t.size() * sizeof(float)))) {
    throw std::runtime_error("truncated checkpoint file " + path.string());
  }
  return t;
}

void check_magic(std::istream& is, const std::array<char, 4>& magic, const std::filesystem::path& path) {
  std::array<char, 4> m{};
  if (!is.read(m.data(), 4) || m != magic) throw std::runtime_error("bad magic in " + path.string());
  const auto fmt = get<std::uint32_t>(is, path);
  if (fmt != kCheckpointFormat) {
    throw std::runtime_error("unsupported checkpoint format " + std::to_string(fmt) + " in " + path.string());
  }
}

void finish(std::ofstream& os, const std::filesystem::path& path) {
  os.flush();
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace

void save_module(const std::filesystem::path& path, const Module& net) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os.write(kModuleMagic.data(), 4);
  put<std::uint32_t>(os, kCheckpointFormat);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(net.slots().size()));
  for (const auto& s : net.slots()) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(s.param.name.size()));
    os.write(s.param.name.data(), static_cast<std::streamsize>(s.param.name.size()));
    put_tensor(os, s.param.var.value());
  }
  finish(os, path);
}

void load_module(const std::filesystem::path& path, Module& net) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  check_magic(is, kModuleMagic, path);
  const auto count = get<std::uint32_t>(is, path);
  if (count != net.slots().size()) {
    throw std::runtime_error(path.string() + ": expected " + std::to_string(net.slots().size()) +
                             " parameters, found " + std::to_string(count));
  }
  std::vector<Tensor> values;
  for (const auto& s : net.slots()) {
    const auto len = get<std::uint32_t>(is, path);
    if (len > 4096) throw std::runtime_error("corrupt parameter name in " + path.string());
    std::string name(len, '\0');
    if (!is.read(name.data(), len)) throw std::runtime_error("truncated checkpoint file " + path.string());
    if (name != s.param.name) {
      throw std::runtime_error(path.string() + ": parameter '" + name + "' where '" + s.param.name +
                               "' was expected");
    }
    Tensor t = get_tensor(is, path);
    require_same_shape(t, s.param.var.value(), (path.string() + " " + name).c_str());
    values.push_back(std::move(t));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    net.slots()[i].param.var.mutable_value() = std::move(values[i]);
  }
}

void save_adam(const std::filesystem::path& path, const AdamState& state) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os.write(kAdamMagic.data(), 4);
  put<std::uint32_t>(os, kCheckpointFormat);
  put<std::int64_t>(os, state.t);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(state.m.size()));
  for (std::size_t i = 0; i < state.m.size(); ++i) {
    put_tensor(os, state.m[i]);
    put_tensor(os, state.v[i]);
  }
  finish(os, path);
}

AdamState load_adam(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  check_magic(is, kAdamMagic, path);
  AdamState s;
  s.t = get<std::int64_t>(is, path);
  const auto count = get<std::uint32_t>(is, path);
  if (count > 100000) throw std::runtime_error("corrupt optimizer state " + path.string());
  for (std::uint32_t i = 0; i < count; ++i) {
    s.m.push_back(get_tensor(is, path));
    s.v.push_back(get_tensor(is, path));
  }
  return s;
}

void write_meta(const std::filesystem::path& path, const CheckpointMeta& meta) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "format = " << kCheckpointFormat << '\n'
     << "arch_version = " << meta.arch_version << '\n'
     << "iteration = " << meta.iteration << '\n'
     << "seed = " << meta.seed << '\n'
     << "config_hash = " << meta.config_hash << '\n'
     << "base_channels = " << meta.network.base_channels << '\n'
     << "resblocks_gc = " << meta.network.num_resblocks_gc << '\n'
     << "resblocks_gr = " << meta.network.num_resblocks_gr << '\n'
     << "disc_layers = " << meta.network.disc_layers << '\n'
     << "instance_norm = " << (meta.network.instance_norm ? 1 : 0) << '\n'
     << "disc_norm = " << (meta.network.disc_norm ? 1 : 0) << '\n'
     << "global_skip = " << (meta.network.global_skip ? 1 : 0) << '\n'
     << "head_scale = " << meta.network.head_scale << '\n';
  finish(os, path);
}

CheckpointMeta read_meta(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(is, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto strip = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    kv[strip(line.substr(0, eq))] = strip(line.substr(eq + 1));
  }
  auto need = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw std::runtime_error(path.string() + ": missing '" + key + "'");
    return it->second;
  };
  auto as_int = [&](const char* key) {
    try {
      return std::stoll(need(key));
    } catch (const std::logic_error&) {
      throw std::runtime_error(path.string() + ": bad value for '" + key + "'");
    }
  };
  CheckpointMeta m;
  m.arch_version = need("arch_version");
  if (m.arch_version != kArchVersion) {
    throw std::runtime_error("checkpoint architecture '" + m.arch_version + "' is incompatible with '" +
                             kArchVersion + "'");
  }
  m.iteration = as_int("iteration");
  try {
    m.seed = std::stoull(need("seed"));
    m.config_hash = std::stoull(need("config_hash"));
  } catch (const std::logic_error&) {
    throw std::runtime_error(path.string() + ": bad seed or config hash");
  }
  m.network.base_channels = static_cast<int>(as_int("base_channels"));
  m.network.num_resblocks_gc = static_cast<int>(as_int("resblocks_gc"));
  m.network.num_resblocks_gr = static_cast<int>(as_int("resblocks_gr"));
  m.network.disc_layers = static_cast<int>(as_int("disc_layers"));
  m.network.instance_norm = as_int("instance_norm") != 0;
  m.network.disc_norm = kv.contains("disc_norm") ? as_int("disc_norm") != 0 : NetworkConfig{}.disc_norm;
  m.network.global_skip = as_int("global_skip") != 0;
  try {
    m.network.head_scale = std::stof(need("head_scale"));
  } catch (const std::logic_error&) {
    throw std::runtime_error(path.string() + ": bad value for 'head_scale'");
  }
  m.network.validate();
  return m;
}

Generator load_derain_generator(const std::filesystem::path& checkpoint_dir) {
  const CheckpointMeta meta = read_meta(checkpoint_dir / "meta.txt");
  Generator g = build_generator(meta.network, GeneratorRole::kDerain);
  load_module(checkpoint_dir / "g_c.bin", g);
  return g;
}

}  // namespace rainfree
