import * as fs from "fs";
import * as path from "path";

import { Checkpoint } from "./checkpoint";
import { CheckpointError } from "./errors";
import { parseNpz } from "./npz";
import { parseSafetensors } from "./safetensors";

/** Load a checkpoint file, dispatching on its extension. */
export function loadCheckpoint(file: string): Checkpoint {
  const ext = path.extname(file).toLowerCase();
  const buf = fs.readFileSync(file);
  if (ext === ".safetensors") return parseSafetensors(buf);
  if (ext === ".npz") return parseNpz(buf);
  throw new CheckpointError(`unsupported checkpoint format '${ext}' for ${file}`);
}
