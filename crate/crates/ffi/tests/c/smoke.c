#include <stdio.h>
#include <string.h>
#include "docent.h"

static int fail(const char *what) {
  const char *msg = docent_last_error();
  fprintf(stderr, "%s: %s\n", what, msg ? msg : "(none)");
  return 1;
}

int main(void) {
  DocentWorld *world = NULL;
  DocentPlan *plan = NULL;
  DocentRun *run = NULL;
  DocentWorld *missing = NULL;
  char *json = NULL;

  if (docent_world_load("tour1", &world) != DOCENT_STATUS_OK) return fail("world");
  const char *script = "@stop duncan\nThis is the [duncan] portrait.\nIt hangs by the door.\n";
  if (docent_plan_compile(script, "smoke", world, NULL, &plan) != DOCENT_STATUS_OK) return fail("compile");
  if (docent_run(plan, world, DOCENT_CONDITION_FULL, 1, NULL, &run) != DOCENT_STATUS_OK) return fail("run");
  if (docent_run_metrics_json(run, world, &json) != DOCENT_STATUS_OK) return fail("metrics");

  printf("elements %zu\n", docent_plan_element_count(plan));
  printf("duration %.3f\n", docent_run_duration(run));
  printf("metrics %s\n", strstr(json, "\"duncan\"") ? "duncan" : "missing");
  docent_string_free(json);

  DocentStatus st = docent_world_load("/no/such/world.json", &missing);
  printf("io %d %s\n", (int)st, missing == NULL ? "null" : "set");

  docent_run_free(run);
  docent_plan_free(plan);
  docent_world_free(world);
  return 0;
}
