#include "pvae/model/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "pvae/errors.hpp"

namespace pvae::model {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[] = "PVAE1";

void put_u32(std::ostream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }

std::uint32_t get_u32(std::istream& in, const std::string& path) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw DataError("checkpoint '" + path + "' is truncated");
  return v;
}

const char* const kConfigKeys[] = {"vocab_size", "embed_dim", "hidden", "sem_dim", "syn_dim"};

}  // namespace

void save_checkpoint(const std::string& path, const Model& model, const std::map<std::string, std::string>& meta) {
  std::ostringstream text;
  const ModelConfig& c = model.config();
  text << "vocab_size=" << c.vocab_size << "\nembed_dim=" << c.embed_dim << "\nhidden=" << c.hidden
       << "\nsem_dim=" << c.sem_dim << "\nsyn_dim=" << c.syn_dim << '\n';
  for (const auto& [k, v] : meta) {
    if (k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos) {
      throw ContractError("checkpoint metadata key '" + k + "' is not a single key=value line");
    }
    text << k << '=' << v << '\n';
  }

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint '" + path + "'");
  out.write(kMagic, 5);
  put_u32(out, static_cast<std::uint32_t>(model.parameters().size()));
  for (const auto& p : model.parameters()) {
    put_u32(out, static_cast<std::uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put_u32(out, static_cast<std::uint32_t>(p.value.rank()));
    for (std::size_t d : p.value.shape()) put_u32(out, static_cast<std::uint32_t>(d));
    out.write(reinterpret_cast<const char*>(p.value.data()), static_cast<std::streamsize>(p.value.size() * 8));
  }
  const std::string block = text.str();
  put_u32(out, static_cast<std::uint32_t>(block.size()));
  out.write(block.data(), static_cast<std::streamsize>(block.size()));
  if (!out) throw IoError("write failed for checkpoint '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint '" + path + "'");
  char magic[5];
  if (!in.read(magic, 5) || std::memcmp(magic, kMagic, 5) != 0) {
    throw DataError("'" + path + "' is not a PVAE1 checkpoint");
  }
  const std::uint32_t count = get_u32(in, path);
  if (count > 4096) throw DataError("checkpoint '" + path + "' claims " + std::to_string(count) + " arrays");
  std::vector<ad::Parameter> arrays;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint32_t len = get_u32(in, path);
    if (len > 4096) throw DataError("checkpoint '" + path + "': implausible name length");
    std::string name(len, '\0');
    if (!in.read(name.data(), len)) throw DataError("checkpoint '" + path + "' is truncated");
    const std::uint32_t rank = get_u32(in, path);
    if (rank == 0 || rank > 4) throw DataError("checkpoint '" + path + "': bad rank for '" + name + "'");
    std::vector<std::size_t> shape;
    std::size_t total = 1;
    for (std::uint32_t r = 0; r < rank; ++r) {
      shape.push_back(get_u32(in, path));
      total *= shape.back();
      if (total > (std::size_t{1} << 31)) throw DataError("checkpoint '" + path + "': array too large");
    }
    std::vector<double> data(total);
    if (!in.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(total * 8))) {
      throw DataError("checkpoint '" + path + "' is truncated");
    }
    arrays.push_back({std::move(name), ad::Tensor(std::move(shape), std::move(data))});
  }
  const std::uint32_t text_len = get_u32(in, path);
  std::string text(text_len, '\0');
  if (!in.read(text.data(), text_len)) throw DataError("checkpoint '" + path + "' is truncated");

  std::map<std::string, std::string> kv;
  std::istringstream ls(text);
  for (std::string line; std::getline(ls, line);) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw DataError("checkpoint '" + path + "': bad metadata line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  ModelConfig config;
  std::size_t* fields[] = {&config.vocab_size, &config.embed_dim, &config.hidden, &config.sem_dim, &config.syn_dim};
  for (std::size_t i = 0; i < 5; ++i) {
    auto it = kv.find(kConfigKeys[i]);
    if (it == kv.end()) throw DataError("checkpoint '" + path + "' lacks '" + kConfigKeys[i] + "'");
    try {
      *fields[i] = std::stoul(it->second);
    } catch (const std::logic_error&) {
      throw DataError("checkpoint '" + path + "': bad value for '" + kConfigKeys[i] + "'");
    }
    kv.erase(it);
  }

  Checkpoint ck{Model(config, 0), std::move(kv)};
  if (arrays.size() != ck.model.parameters().size()) {
    throw DataError("checkpoint '" + path + "' has " + std::to_string(arrays.size()) + " arrays, model expects " +
                    std::to_string(ck.model.parameters().size()));
  }
  for (auto& a : arrays) {
    ad::Parameter* p = nullptr;
    try {
      p = &ck.model.param(a.name);
    } catch (const IndexError&) {
      throw DataError("checkpoint '" + path + "': unknown array '" + a.name + "'");
    }
    if (!p->value.same_shape(a.value)) {
      throw DataError("checkpoint '" + path + "': array '" + a.name + "' has shape " +
                      ad::shape_string(a.value.shape()) + ", expected " + ad::shape_string(p->value.shape()));
    }
    p->value = std::move(a.value);
  }
  return ck;
}

}  // namespace pvae::model
