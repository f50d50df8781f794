#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "wcps/config.hpp"
#include "wcps/errors.hpp"

using namespace wcps;

TEST(Config, DefaultShape) {
  const auto c = default_config();
  c.validate();
  EXPECT_EQ(generator_node_count(c.topology), 20);
  EXPECT_EQ(c.pendulums.size(), 5u);
  EXPECT_GE(c.round_period_ms, 10.0);
  EXPECT_LE(c.round_period_ms, 100.0);
}

TEST(Config, JsonRoundTrip) {
  auto c = default_config();
  c.seed = 77;
  c.topology.p = 0.9;
  c.events.push_back(Command{Command::Kind::mode_request, 40, 4});
  c.events.push_back(Command{Command::Kind::set_link, 50, 0, 1, 2, 0, 0, 0.3, 0});
  const auto back = config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_NE(config_hash(back), config_hash(default_config()));
  EXPECT_EQ(config_hash(c).size(), 16u);
}

TEST(Config, PartialDocumentKeepsDefaults) {
  const auto c = config_from_json(nlohmann::json{{"seed", 5}, {"duration", 10}});
  EXPECT_EQ(c.seed, 5u);
  EXPECT_EQ(c.duration, 10);
  EXPECT_EQ(c.pendulums.size(), 5u);
}

TEST(Config, InvalidFieldsRejected) {
  EXPECT_THROW(config_from_json(nlohmann::json{{"round_period_ms", 5}}), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json{{"actuation_delay", 4}}), ConfigError);
  EXPECT_THROW(config_from_json(nlohmann::json{{"seed", "x"}}), ConfigError);
}

TEST(Config, LoadErrors) {
  EXPECT_THROW(load_config("/nonexistent/wcps.json"), IoError);
  const auto path = std::filesystem::temp_directory_path() / "wcps_bad.json";
  std::ofstream(path) << "{ not json";
  EXPECT_THROW(load_config(path), ConfigError);
  std::filesystem::remove(path);
}

TEST(Command, JsonForms) {
  const auto c = command_from_json(nlohmann::json::parse(R"({"type":"move_node","node":7,"x":1.5,"y":-0.25})"));
  EXPECT_EQ(c.kind, Command::Kind::move_node);
  EXPECT_EQ(c.node, 7);
  EXPECT_EQ(c.y, -0.25);
  EXPECT_EQ(command_from_json(to_json(c)), c);
  EXPECT_THROW(command_from_json(nlohmann::json::parse(R"({"type":"mode_request"})")), ConfigError);
}
