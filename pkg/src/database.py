import datetime
import json
import logging
import os
from typing import Any, Dict, List, Optional
from sqlalchemy import Boolean, Column, Integer, String, Text, DateTime, Index
from sqlalchemy.ext.asyncio import create_async_engine, AsyncSession, async_sessionmaker
from sqlalchemy.orm import declarative_base
from sqlalchemy.future import select

from src.config import Config, Job

logger = logging.getLogger(__name__)

Base = declarative_base()

def params_key(params: Dict[str, Any]) -> str:
    return json.dumps(params, sort_keys=True, separators=(",", ":"))

class ExperimentRun(Base):
    __tablename__ = "experiment_runs"

    id = Column(Integer, primary_key=True)
    job_name = Column(String, nullable=False)
    kind = Column(String, nullable=False)
    params_key = Column(String, nullable=False)
    passed = Column(Boolean, nullable=False)
    result_json = Column(Text, nullable=False)
    created_at = Column(DateTime, default=datetime.datetime.utcnow)

    # One run per job configuration
    __table_args__ = (
        Index('idx_unique_run', 'job_name', 'kind', 'params_key', unique=True),
    )

class Database:
    def __init__(self, db_name: str = None):
        db_name = db_name or Config.DB_NAME
        if db_name != ":memory:":
            os.makedirs(os.path.dirname(os.path.abspath(db_name)), exist_ok=True)
        self.engine = create_async_engine(f"sqlite+aiosqlite:///{db_name}", echo=False)
        self.async_session = async_sessionmaker(self.engine, expire_on_commit=False)

    async def init_db(self):
        async with self.engine.begin() as conn:
            await conn.run_sync(Base.metadata.create_all)

    async def get_session(self) -> AsyncSession:
        return self.async_session()

    async def dispose(self):
        await self.engine.dispose()

class RunLedger:
    def __init__(self, db: Database):
        self.db = db

    def _match(self, job: Job):
        return select(ExperimentRun).where(
            ExperimentRun.job_name == job.name,
            ExperimentRun.kind == job.kind,
            ExperimentRun.params_key == params_key(job.params)
        )

    async def get_run(self, job: Job) -> Optional[ExperimentRun]:
        async with await self.db.get_session() as session:
            result = await session.execute(self._match(job))
            return result.scalar_one_or_none()

    async def is_recorded(self, job: Job) -> bool:
        return await self.get_run(job) is not None

    async def add_run(self, job: Job, passed: bool, result: Dict[str, Any]):
        async with await self.db.get_session() as session:
            try:
                run = ExperimentRun(
                    job_name=job.name,
                    kind=job.kind,
                    params_key=params_key(job.params),
                    passed=passed,
                    result_json=json.dumps(result, sort_keys=True)
                )
                session.add(run)
                await session.commit()
            except Exception as e:
                await session.rollback()
                raise e

    async def replace_run(self, job: Job, passed: bool, result: Dict[str, Any]):
        async with await self.db.get_session() as session:
            existing = (await session.execute(self._match(job))).scalar_one_or_none()
            if existing is None:
                session.add(ExperimentRun(
                    job_name=job.name,
                    kind=job.kind,
                    params_key=params_key(job.params),
                    passed=passed,
                    result_json=json.dumps(result, sort_keys=True)
                ))
            else:
                existing.passed = passed
                existing.result_json = json.dumps(result, sort_keys=True)
                existing.created_at = datetime.datetime.utcnow()
            await session.commit()

    async def get_result(self, job: Job) -> Optional[Dict[str, Any]]:
        async with await self.db.get_session() as session:
            result = await session.execute(self._match(job))
            run = result.scalar_one_or_none()
            return json.loads(run.result_json) if run else None

    async def list_runs(self) -> List[ExperimentRun]:
        async with await self.db.get_session() as session:
            result = await session.execute(select(ExperimentRun).order_by(ExperimentRun.id))
            return list(result.scalars().all())
