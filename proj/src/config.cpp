#include "groklab/config.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace groklab {

using nlohmann::json;

ModelConfig RunConfig::model_config() const {
  ModelConfig mc;
  mc.arch = arch;
  mc.depth = depth;
  mc.width = width;
  mc.heads = heads;
  mc.context_len = 4;
  mc.answer_classes = task.q;
  const int operand_top = (task.p == task.q) ? task.q : task.q + task.p;
  mc.vocab_size = operand_top + 2;
  mc.tied_embeddings = true;
  return mc;
}

void RunConfig::validate() const {
  if (task.p < 2) throw ConfigError("task.p must be >= 2");
  if (task.q < 2) throw ConfigError("task.q must be >= 2");
  if (task.op == OpKind::mod_add && task.q != task.p)
    throw ConfigError("task.q must equal task.p for mod_add");
  if (task.op == OpKind::s5_compose && (task.p != 120 || task.q != 120))
    throw ConfigError("task.p and task.q must be 120 for s5_compose");
  if (task.op == OpKind::s5_compose && task.symmetric)
    throw ConfigError("task.symmetric cannot be set for s5_compose");
  if (!(task.r > 0.0 && task.r < 1.0)) throw ConfigError("task.r must be in (0,1)");
  if (width <= 0) throw ConfigError("model.width must be positive");
  if (arch == Arch::transformer) {
    if (depth <= 0) throw ConfigError("model.depth must be positive");
    if (heads <= 0 || width % heads != 0)
      throw ConfigError("model.width must be divisible by model.heads");
  }
  optimizer.validate("optimizer");
  if (schedule.warmup_steps < 0) throw ConfigError("schedule.warmup_steps must be >= 0");
  if (!(schedule.base_lr > 0.0)) throw ConfigError("schedule.base_lr must be positive");
  if (clip.enabled && !(clip.eta > 0.0)) throw ConfigError("clip.eta must be positive");
  if (budget_steps < 0) throw ConfigError("budget_steps must be >= 0");
  if (!(analysis.spectral_cutoff > 0.0 && analysis.spectral_cutoff < 0.5))
    throw ConfigError("analysis.spectral_cutoff must be in (0, 0.5)");
  if (analysis.alpha_points < 1) throw ConfigError("analysis.alpha_points must be >= 1");
  if (analysis.id_k < 2) throw ConfigError("analysis.id_k must be >= 2");
  if (!(analysis.id_discard >= 0.0 && analysis.id_discard < 0.5))
    throw ConfigError("analysis.id_discard must be in [0, 0.5)");
  if (analysis.train_threshold <= 0.0 || analysis.train_threshold > 1.0)
    throw ConfigError("analysis.train_threshold must be in (0, 1]");
  if (analysis.val_threshold <= 0.0 || analysis.val_threshold > 1.0)
    throw ConfigError("analysis.val_threshold must be in (0, 1]");
}

namespace {

const char* op_name(OpKind op) { return op == OpKind::mod_add ? "mod_add" : "s5_compose"; }

OpKind op_from_name(const std::string& s) {
  if (s == "mod_add") return OpKind::mod_add;
  if (s == "s5_compose") return OpKind::s5_compose;
  throw ConfigError("task.op: unknown operation '" + s + "'");
}

const char* arch_name(Arch a) { return a == Arch::transformer ? "transformer" : "mlp"; }

Arch arch_from_name(const std::string& s) {
  if (s == "transformer") return Arch::transformer;
  if (s == "mlp") return Arch::mlp;
  throw ConfigError("model.arch: unknown architecture '" + s + "'");
}

// typed field access with a path-carrying error
template <class T>
T get(const json& j, const std::string& path) {
  const json* cur = &j;
  std::string key;
  std::istringstream ss(path);
  while (std::getline(ss, key, '.')) {
    if (!cur->is_object() || !cur->contains(key))
      throw ConfigError("missing config field: " + path);
    cur = &(*cur)[key];
  }
  try {
    return cur->get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config field has wrong type: " + path);
  }
}

template <class T>
T get_or(const json& j, const std::string& path, T fallback) {
  try {
    return get<T>(j, path);
  } catch (const ConfigError& e) {
    if (std::string(e.what()).rfind("missing", 0) == 0) return fallback;
    throw;
  }
}

}  // namespace

std::string serialize_config(const RunConfig& c) {
  json j;
  j["task"] = {{"op", op_name(c.task.op)},   {"p", c.task.p},
               {"q", c.task.q},              {"symmetric", c.task.symmetric},
               {"r", c.task.r},              {"seed", c.task.seed}};
  j["model"] = {{"arch", arch_name(c.arch)},
                {"width", c.width},
                {"depth", c.depth},
                {"heads", c.heads}};
  j["optimizer"] = {{"algo", algo_name(c.optimizer.algo)},
                    {"lr", c.optimizer.lr},
                    {"weight_decay", c.optimizer.weight_decay},
                    {"beta1", c.optimizer.beta1},
                    {"beta2", c.optimizer.beta2},
                    {"eps", c.optimizer.eps},
                    {"momentum", c.optimizer.momentum},
                    {"rmsprop_alpha", c.optimizer.rmsprop_alpha},
                    {"rprop_eta_plus", c.optimizer.rprop_eta_plus},
                    {"rprop_eta_minus", c.optimizer.rprop_eta_minus},
                    {"rprop_step_min", c.optimizer.rprop_step_min},
                    {"rprop_step_max", c.optimizer.rprop_step_max},
                    {"decay_embeddings", c.optimizer.decay_embeddings}};
  j["schedule"] = {{"warmup_steps", c.schedule.warmup_steps}, {"base_lr", c.schedule.base_lr}};
  j["clip"] = {{"enabled", c.clip.enabled}, {"eta", c.clip.eta}};
  j["budget_steps"] = c.budget_steps;
  j["checkpoint_stride"] = c.checkpoint_stride;
  const AnalysisConfig& a = c.analysis;
  j["analysis"] = {{"spectral_window_start", a.spectral_window_start},
                   {"spectral_window_end", a.spectral_window_end},
                   {"spectral_cutoff", a.spectral_cutoff},
                   {"spectral_log_loss", a.spectral_log_loss},
                   {"alpha_min", a.alpha_min},
                   {"alpha_max", a.alpha_max},
                   {"alpha_points", a.alpha_points},
                   {"beta_min", a.beta_min},
                   {"beta_max", a.beta_max},
                   {"beta_points", a.beta_points},
                   {"curvature_stride", a.curvature_stride},
                   {"curvature_tol", a.curvature_tol},
                   {"curvature_max_iter", a.curvature_max_iter},
                   {"id_method", a.id_method},
                   {"id_k", a.id_k},
                   {"id_discard", a.id_discard},
                   {"id_position", a.id_position},
                   {"id_stride", a.id_stride},
                   {"train_threshold", a.train_threshold},
                   {"val_threshold", a.val_threshold}};
  return j.dump(2) + "\n";
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  c.task.op = op_from_name(get<std::string>(j, "task.op"));
  c.task.p = get<int>(j, "task.p");
  c.task.q = get<int>(j, "task.q");
  c.task.symmetric = get_or(j, "task.symmetric", false);
  c.task.r = get<double>(j, "task.r");
  c.task.seed = get_or<std::uint64_t>(j, "task.seed", 0);
  c.arch = arch_from_name(get<std::string>(j, "model.arch"));
  c.width = get<int>(j, "model.width");
  c.depth = get_or(j, "model.depth", 2);
  c.heads = get_or(j, "model.heads", 4);
  c.optimizer.algo = algo_from_name(get_or<std::string>(j, "optimizer.algo", "adamw"));
  c.optimizer.lr = get_or(j, "optimizer.lr", 1e-4);
  c.optimizer.weight_decay = get_or(j, "optimizer.weight_decay", 1.0);
  c.optimizer.beta1 = get_or(j, "optimizer.beta1", 0.9);
  c.optimizer.beta2 = get_or(j, "optimizer.beta2", 0.98);
  c.optimizer.eps = get_or(j, "optimizer.eps", 1e-8);
  c.optimizer.momentum = get_or(j, "optimizer.momentum", 0.9);
  c.optimizer.rmsprop_alpha = get_or(j, "optimizer.rmsprop_alpha", 0.99);
  c.optimizer.rprop_eta_plus = get_or(j, "optimizer.rprop_eta_plus", 1.2);
  c.optimizer.rprop_eta_minus = get_or(j, "optimizer.rprop_eta_minus", 0.5);
  c.optimizer.rprop_step_min = get_or(j, "optimizer.rprop_step_min", 1e-6);
  c.optimizer.rprop_step_max = get_or(j, "optimizer.rprop_step_max", 50.0);
  c.optimizer.decay_embeddings = get_or(j, "optimizer.decay_embeddings", true);
  c.schedule.warmup_steps = get_or(j, "schedule.warmup_steps", 10);
  c.schedule.base_lr = get_or(j, "schedule.base_lr", c.optimizer.lr);
  c.clip.enabled = get_or(j, "clip.enabled", false);
  c.clip.eta = get_or(j, "clip.eta", 1.0);
  c.budget_steps = get<long long>(j, "budget_steps");
  c.checkpoint_stride = get_or<long long>(j, "checkpoint_stride", 10);
  if (j.contains("analysis")) {
    AnalysisConfig& a = c.analysis;
    a.spectral_window_start = get_or<long long>(j, "analysis.spectral_window_start", 0);
    a.spectral_window_end = get_or<long long>(j, "analysis.spectral_window_end", 400);
    a.spectral_cutoff = get_or(j, "analysis.spectral_cutoff", 0.01);
    a.spectral_log_loss = get_or(j, "analysis.spectral_log_loss", false);
    a.alpha_min = get_or(j, "analysis.alpha_min", -3.0);
    a.alpha_max = get_or(j, "analysis.alpha_max", 3.0);
    a.alpha_points = get_or(j, "analysis.alpha_points", 201);
    a.beta_min = get_or(j, "analysis.beta_min", -1.0);
    a.beta_max = get_or(j, "analysis.beta_max", 2.0);
    a.beta_points = get_or(j, "analysis.beta_points", 101);
    a.curvature_stride = get_or<long long>(j, "analysis.curvature_stride", 100);
    a.curvature_tol = get_or(j, "analysis.curvature_tol", 1e-4);
    a.curvature_max_iter = get_or(j, "analysis.curvature_max_iter", 400);
    a.id_method = get_or<std::string>(j, "analysis.id_method", "mle_inverse");
    a.id_k = get_or(j, "analysis.id_k", 2);
    a.id_discard = get_or(j, "analysis.id_discard", 0.1);
    a.id_position = get_or(j, "analysis.id_position", -1);
    a.id_stride = get_or<long long>(j, "analysis.id_stride", 100);
    a.train_threshold = get_or(j, "analysis.train_threshold", 1.0);
    a.val_threshold = get_or(j, "analysis.val_threshold", 1.0);
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void save_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw RuntimeFault("cannot write config file: " + path);
  out << serialize_config(cfg);
}

std::uint64_t config_hash(const RunConfig& cfg) { return fnv1a(serialize_config(cfg)); }

}  // namespace groklab
