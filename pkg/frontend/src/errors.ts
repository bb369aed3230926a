/** Error taxonomy: every failure names the checkpoint key or file it blames. */

export class ArchiveError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ArchiveError";
  }
}

export class CheckpointError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "CheckpointError";
  }
}

/** A mapped tensor type the archive format cannot carry without numerics. */
export class UnsupportedDtypeError extends CheckpointError {
  constructor(
    public readonly key: string,
    public readonly dtype: string,
  ) {
    super(`unsupported dtype ${dtype} for checkpoint key '${key}'`);
    this.name = "UnsupportedDtypeError";
  }
}

export class MissingKeyError extends CheckpointError {
  constructor(public readonly key: string) {
    super(`checkpoint is missing key '${key}'`);
    this.name = "MissingKeyError";
  }
}

export class ShapeMismatchError extends CheckpointError {
  constructor(
    public readonly key: string,
    public readonly got: number[],
    public readonly want: number[],
  ) {
    super(
      `shape mismatch for checkpoint key '${key}': ` +
        `got (${got.join(", ")}), want (${want.join(", ")})`,
    );
    this.name = "ShapeMismatchError";
  }
}

export class ManifestError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "ManifestError";
  }
}
