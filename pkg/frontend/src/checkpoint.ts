/** Format-agnostic view of a checkpoint: named entries that report shape
 * and source dtype cheaply and materialize values on demand. */

import { Tensor } from "./tensor";

export interface CheckpointEntry {
  shape: number[];
  /** Dtype tag in the source format's own vocabulary ("F32", "<f4", ...). */
  sourceDtype: string;
  tensor(): Tensor;
}

export type Checkpoint = Map<string, CheckpointEntry>;
