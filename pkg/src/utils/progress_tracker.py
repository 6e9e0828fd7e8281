"""
Stage progress tracking and run logging

Tracks long computations (schedule segments, audit suites, evaluation
sweeps) stage by stage with durations, overall percentage, ETA and a final
summary. LoggingConfig sets up the per-run log file and console handler.
"""

import time
import logging
from typing import Dict, Any, List, Optional
from datetime import datetime, timedelta
from pathlib import Path

LOG_FORMAT = '%(asctime)s | %(levelname)-8s | %(name)s | %(message)s'


class ProgressTracker:
    """
    Track a fixed number of stages and log timing for each of them
    """

    def __init__(self, logger: logging.Logger, total_stages: int, process_name: str = "Run"):
        """
        Initialize progress tracker

        Args:
            logger: Logger instance for progress reporting
            total_stages: Number of stages the run will go through
            process_name: Name shown in the start and summary banners
        """
        self.logger = logger
        self.total_stages = total_stages
        self.process_name = process_name
        self.completed_stages = 0
        self.current_stage = ""
        self.current_stage_start_time = None
        self.overall_start_time = time.time()
        self.stage_stats: List[Dict[str, Any]] = []

        self.logger.info(f"🚀 Starting {self.process_name} - {self.total_stages} stages")
        self.logger.info("=" * 80)

    def start_stage(self, name: str, detail: str = "") -> None:
        """
        Mark the start of a stage

        Args:
            name: Stage name (segment label, suite name, state label)
            detail: Optional one-line description logged under the header
        """
        self.current_stage = name
        self.current_stage_start_time = time.time()

        progress_pct = (self.completed_stages / self.total_stages) * 100 if self.total_stages else 100.0
        self.logger.info(
            f"📂 [{self.completed_stages + 1}/{self.total_stages}] ({progress_pct:.1f}%) Starting: {name}"
        )
        if detail:
            self.logger.info(f"   📊 {detail}")

        if self.stage_stats:
            avg_time = sum(stat['duration'] for stat in self.stage_stats) / len(self.stage_stats)
            eta_seconds = avg_time * (self.total_stages - self.completed_stages)
            eta_time = datetime.now() + timedelta(seconds=eta_seconds)
            self.logger.info(
                f"   ⏰ ETA: {eta_time.strftime('%Y-%m-%d %H:%M:%S')} "
                f"({self._format_duration(eta_seconds)} remaining)"
            )

    def complete_stage(self, steps: int = 0, success: bool = True, error_msg: Optional[str] = None) -> None:
        """
        Mark completion of the current stage

        Args:
            steps: Work units done in the stage (time steps, checks, records)
            success: Whether the stage succeeded
            error_msg: Error message if it failed
        """
        if not self.current_stage_start_time:
            return

        duration = time.time() - self.current_stage_start_time
        self.stage_stats.append({
            "stage": self.current_stage,
            "steps": steps,
            "duration": duration,
            "success": success,
            "error": error_msg,
        })
        self.completed_stages += 1

        if success:
            self.logger.info(f"✅ {self.current_stage} completed: {steps:,} steps in {self._format_duration(duration)}")
        else:
            self.logger.error(f"❌ {self.current_stage} failed: {error_msg}")

        overall_pct = (self.completed_stages / self.total_stages) * 100 if self.total_stages else 100.0
        elapsed_total = time.time() - self.overall_start_time
        self.logger.info(
            f"📈 Overall Progress: {self.completed_stages}/{self.total_stages} stages "
            f"({overall_pct:.1f}%) in {self._format_duration(elapsed_total)}"
        )
        self.logger.info("-" * 60)
        self.current_stage_start_time = None

    def get_summary(self) -> Dict[str, Any]:
        total_duration = time.time() - self.overall_start_time
        successful = sum(1 for stat in self.stage_stats if stat['success'])
        return {
            "process_name": self.process_name,
            "total_stages": self.total_stages,
            "completed_stages": self.completed_stages,
            "successful_stages": successful,
            "failed_stages": len(self.stage_stats) - successful,
            "total_steps": sum(stat['steps'] for stat in self.stage_stats),
            "total_duration_seconds": round(total_duration, 2),
            "total_duration_formatted": self._format_duration(total_duration),
            "success_rate": round(successful / len(self.stage_stats) * 100, 2) if self.stage_stats else 0,
            "stage_details": self.stage_stats,
        }

    def log_final_summary(self) -> None:
        summary = self.get_summary()

        self.logger.info("=" * 80)
        self.logger.info(f"🏁 {self.process_name.upper()} COMPLETE")
        self.logger.info("=" * 80)
        self.logger.info(
            f"📊 Stages: {summary['completed_stages']}/{summary['total_stages']} "
            f"({summary['success_rate']:.1f}% success rate)"
        )
        self.logger.info(f"📈 Steps: {summary['total_steps']:,} total")
        self.logger.info(f"⏱️  Duration: {summary['total_duration_formatted']}")

        if summary['failed_stages'] > 0:
            self.logger.warning(f"⚠️ {summary['failed_stages']} stages failed:")
            for stat in summary['stage_details']:
                if not stat['success']:
                    self.logger.warning(f"   ❌ {stat['stage']}: {stat['error']}")
        self.logger.info("=" * 80)

    @staticmethod
    def _format_duration(seconds: float) -> str:
        if seconds < 60:
            return f"{seconds:.1f}s"
        elif seconds < 3600:
            minutes = int(seconds // 60)
            return f"{minutes}m {seconds % 60:.0f}s"
        hours = int(seconds // 3600)
        minutes = int((seconds % 3600) // 60)
        return f"{hours}h {minutes}m"


class LoggingConfig:
    """
    Process-wide logging setup, called once by the command-line entry point
    """

    @staticmethod
    def setup_run_logging(
        log_dir: Optional[Path] = None,
        process_name: str = "qat",
        level: str = "INFO",
        log_to_file: bool = True,
    ) -> logging.Logger:
        """
        Configure console logging and, optionally, a timestamped log file

        Args:
            log_dir: Directory for log files (default: current directory)
            process_name: Prefix of the log file name
            level: Root log level name
            log_to_file: Write <process>_<YYYYmmdd_HHMMSS>.log next to the console output

        Returns:
            Logger named after the process
        """
        handlers: List[logging.Handler] = [logging.StreamHandler()]
        log_filename = None
        if log_to_file:
            log_dir = Path.cwd() if log_dir is None else Path(log_dir)
            log_dir.mkdir(parents=True, exist_ok=True)
            timestamp = datetime.now().strftime("%Y%m%d_%H%M%S")
            log_filename = log_dir / f"{process_name}_{timestamp}.log"
            handlers.insert(0, logging.FileHandler(log_filename, mode='w', encoding='utf-8'))

        logging.basicConfig(
            level=getattr(logging, str(level).upper(), logging.INFO),
            format=LOG_FORMAT,
            handlers=handlers,
            force=True,
        )

        logger = logging.getLogger(process_name)
        logger.info("🔧 Logging system initialized")
        if log_filename is not None:
            logger.info(f"📝 Log file: {log_filename}")
        logger.info(f"🕐 Started at: {datetime.now().strftime('%Y-%m-%d %H:%M:%S')}")
        logger.info("=" * 80)
        return logger
