export { render, renderToFile } from "./figures";
export {
  EmptyInputError, FIGURE_KINDS, loadLandscape, loadSpec, loadZetaCurve,
  parseSpec, SchemaError,
} from "./schema";
export type { FigureKind, FigureSpec } from "./schema";
export {
  groupBy, median, readResults, readTrajectories, RESULT_COLUMNS,
  RESULTS_SCHEMA_VERSION, TRAJECTORIES_SCHEMA_VERSION,
} from "./data";
export type { ResultRow, TrajectoryRow, TrajectoryTable } from "./data";
